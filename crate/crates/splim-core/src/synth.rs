//! Synthetic matrix generation and the sparsity/skew transformations used
//! by the sensitivity sweeps.
//!
//! All randomness goes through a seeded ChaCha8 stream so every generated
//! matrix is reproducible across platforms and runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coo::{CooEntry, CooMatrix};
use crate::{Error, Result};

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Value in (0, 1]; `gen::<f64>()` yields [0, 1).
fn unit_value(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// n x n matrix with exactly `k` non-zeros per row at distinct uniformly
/// drawn columns.
pub fn gen_uniform(n: usize, k: usize, seed: u64) -> Result<CooMatrix> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds matrix dimension n = {n}"
        )));
    }
    let mut rng = rng_for(seed);
    let mut cols: Vec<u32> = (0..n as u32).collect();
    let mut entries = Vec::with_capacity(n * k);
    for row in 0..n as u32 {
        // Partial Fisher-Yates: the first k positions become the row's columns.
        for i in 0..k {
            let j = rng.gen_range(i..n);
            cols.swap(i, j);
        }
        let mut picked = cols[..k].to_vec();
        picked.sort_unstable();
        for col in picked {
            entries.push(CooEntry::new(row, col, unit_value(&mut rng)));
        }
    }
    CooMatrix::new(n, n, entries)
}

/// n x n circulant band: row i holds columns i, i+1, ..., i+k-1 (mod n).
///
/// Every row and every column carries exactly `k` non-zeros, so the non-zero
/// distribution has zero deviation along both axes and the condensed formats
/// pack with no padding at all.
pub fn gen_banded(n: usize, k: usize, seed: u64) -> Result<CooMatrix> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds matrix dimension n = {n}"
        )));
    }
    let mut rng = rng_for(seed);
    let mut entries = Vec::with_capacity(n * k);
    for row in 0..n {
        for d in 0..k {
            let col = ((row + d) % n) as u32;
            entries.push(CooEntry::new(row as u32, col, unit_value(&mut rng)));
        }
    }
    CooMatrix::new(n, n, entries)
}

/// Two-population row mix: `heavy_rows` rows carry `k_heavy` non-zeros, the
/// rest carry `k_light`. Produces the skewed inputs for the deviation sweep.
pub fn gen_skewed(
    n: usize,
    k_light: usize,
    k_heavy: usize,
    heavy_rows: usize,
    seed: u64,
) -> Result<CooMatrix> {
    if k_heavy > n || k_light > n || heavy_rows > n {
        return Err(Error::InvalidArgument(
            "row population exceeds matrix dimension".into(),
        ));
    }
    let mut rng = rng_for(seed);
    let mut row_ids: Vec<usize> = (0..n).collect();
    row_ids.shuffle(&mut rng);
    let heavy: std::collections::HashSet<usize> = row_ids[..heavy_rows].iter().copied().collect();

    let mut cols: Vec<u32> = (0..n as u32).collect();
    let mut entries = Vec::new();
    for row in 0..n {
        let k = if heavy.contains(&row) { k_heavy } else { k_light };
        for i in 0..k {
            let j = rng.gen_range(i..n);
            cols.swap(i, j);
        }
        let mut picked = cols[..k].to_vec();
        picked.sort_unstable();
        for col in picked {
            entries.push(CooEntry::new(row as u32, col, unit_value(&mut rng)));
        }
    }
    CooMatrix::new(n, n, entries)
}

/// Hub-structured matrix: a dense `block x block` clique in the top-left
/// corner over a uniform background of `k` non-zeros per row. The clique
/// skews both the row and the column distributions, the shape redistribution
/// is meant to flatten.
pub fn gen_clustered(n: usize, k: usize, block: usize, seed: u64) -> Result<CooMatrix> {
    if k > n || block > n {
        return Err(Error::InvalidArgument(
            "block or background degree exceeds matrix dimension".into(),
        ));
    }
    let mut rng = rng_for(seed);
    let mut cols: Vec<u32> = (0..n as u32).collect();
    let mut entries = Vec::new();
    for row in 0..n {
        let mut taken: Vec<u32> = if row < block {
            (0..block as u32).collect()
        } else {
            Vec::new()
        };
        // Background columns; clique rows skip columns the clique already has.
        let mut picked = 0usize;
        let mut i = 0usize;
        while picked < k && i < n {
            let j = rng.gen_range(i..n);
            cols.swap(i, j);
            let c = cols[i];
            i += 1;
            if row < block && (c as usize) < block {
                continue;
            }
            taken.push(c);
            picked += 1;
        }
        taken.sort_unstable();
        for col in taken {
            entries.push(CooEntry::new(row as u32, col, unit_value(&mut rng)));
        }
    }
    CooMatrix::new(n, n, entries)
}

/// Keeps `round(keep_fraction * nnz)` entries drawn uniformly without
/// replacement; the survivors keep their coordinates and values.
pub fn thin(m: &CooMatrix, keep_fraction: f64, seed: u64) -> Result<CooMatrix> {
    if !(0.0..=1.0).contains(&keep_fraction) {
        return Err(Error::InvalidArgument(format!(
            "keep_fraction {keep_fraction} outside [0, 1]"
        )));
    }
    let keep = (keep_fraction * m.nnz() as f64).round() as usize;
    let mut rng = rng_for(seed);
    let mut order: Vec<usize> = (0..m.nnz()).collect();
    // Partial shuffle is enough: only the first `keep` slots matter.
    for i in 0..keep.min(m.nnz()) {
        let j = rng.gen_range(i..m.nnz());
        order.swap(i, j);
    }
    let mut picked: Vec<usize> = order[..keep].to_vec();
    picked.sort_unstable();
    let entries: Vec<CooEntry> = picked.iter().map(|&i| m.entries()[i]).collect();
    CooMatrix::new(m.n_rows(), m.n_cols(), entries)
}

/// Moves entries from the heaviest rows to the lightest until the per-row
/// counts are balanced (max - min <= 1). Values ride along unchanged.
pub fn redistribute(m: &CooMatrix, seed: u64) -> CooMatrix {
    redistribute_until(m, None, seed)
}

/// Like [`redistribute`], but stops as soon as the measured row deviation
/// first drops to or below `target_sigma` (when given). This is how the
/// sigma/2 and sigma/3 sweep points are produced.
pub fn redistribute_until(m: &CooMatrix, target_sigma: Option<f64>, seed: u64) -> CooMatrix {
    let n = m.n_rows();
    if n == 0 || m.nnz() == 0 {
        return m.clone();
    }
    let mut rng = rng_for(seed);

    // Row-indexed working copy: per row, sorted (col, val) pairs.
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for e in m.entries() {
        rows[e.row as usize].push((e.col, e.val));
    }

    let sigma_of = |rows: &[Vec<(u32, f64)>]| -> f64 {
        let mean = rows.iter().map(|r| r.len()).sum::<usize>() as f64 / n as f64;
        (rows
            .iter()
            .map(|r| {
                let d = r.len() as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n as f64)
            .sqrt()
    };

    loop {
        if let Some(t) = target_sigma {
            if sigma_of(&rows) <= t {
                break;
            }
        }
        let max = rows.iter().map(|r| r.len()).max().unwrap();
        let min = rows.iter().map(|r| r.len()).min().unwrap();
        if max - min <= 1 {
            break;
        }
        let heavy = rows.iter().position(|r| r.len() == max).unwrap();

        // Lightest row with a free column; skip full rows, give up when none
        // lighter than the heaviest row can take an entry.
        let mut candidates: Vec<usize> = (0..n).filter(|&r| rows[r].len() < max - 1).collect();
        candidates.sort_by_key(|&r| (rows[r].len(), r));
        let mut moved = false;
        for light in candidates {
            let occupied: std::collections::HashSet<u32> =
                rows[light].iter().map(|&(c, _)| c).collect();
            let free: Vec<u32> = (0..m.n_cols() as u32)
                .filter(|c| !occupied.contains(c))
                .collect();
            if free.is_empty() {
                continue;
            }
            let take = rng.gen_range(0..rows[heavy].len());
            let (_, val) = rows[heavy].remove(take);
            let col = free[rng.gen_range(0..free.len())];
            rows[light].push((col, val));
            moved = true;
            break;
        }
        if !moved {
            break;
        }
    }

    let mut entries = Vec::with_capacity(m.nnz());
    for (r, row) in rows.iter().enumerate() {
        for &(c, v) in row {
            entries.push(CooEntry::new(r as u32, c, v));
        }
    }
    CooMatrix::new(m.n_rows(), m.n_cols(), entries).expect("moves preserve validity")
}

/// Generator spec of the form `uniform:n=1024,k=16,seed=7`.
///
/// Recognized kinds: `uniform`, `banded`, `skewed` (extra keys `heavy`,
/// `kheavy`), `clustered` (extra key `block`). Missing `seed` defaults to 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenSpec {
    Uniform { n: usize, k: usize, seed: u64 },
    Banded { n: usize, k: usize, seed: u64 },
    Skewed { n: usize, k: usize, k_heavy: usize, heavy: usize, seed: u64 },
    Clustered { n: usize, k: usize, block: usize, seed: u64 },
}

impl GenSpec {
    pub fn parse(spec: &str) -> Result<GenSpec> {
        let bad = |msg: String| Error::InvalidArgument(format!("generator spec '{spec}': {msg}"));
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| bad("expected '<kind>:<key>=<value>,...'".into()))?;
        let mut n = None;
        let mut k = None;
        let mut seed = 0u64;
        let mut heavy = None;
        let mut k_heavy = None;
        let mut block = None;
        for pair in rest.split(',') {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed pair '{pair}'")))?;
            match key.trim() {
                "n" => n = Some(value.parse().map_err(|_| bad(format!("bad n '{value}'")))?),
                "k" => k = Some(value.parse().map_err(|_| bad(format!("bad k '{value}'")))?),
                "seed" => seed = value.parse().map_err(|_| bad(format!("bad seed '{value}'")))?,
                "heavy" => heavy = Some(value.parse().map_err(|_| bad(format!("bad heavy '{value}'")))?),
                "kheavy" => k_heavy = Some(value.parse().map_err(|_| bad(format!("bad kheavy '{value}'")))?),
                "block" => block = Some(value.parse().map_err(|_| bad(format!("bad block '{value}'")))?),
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        let n = n.ok_or_else(|| bad("missing n".into()))?;
        let k = k.ok_or_else(|| bad("missing k".into()))?;
        match kind {
            "uniform" => Ok(GenSpec::Uniform { n, k, seed }),
            "banded" => Ok(GenSpec::Banded { n, k, seed }),
            "skewed" => Ok(GenSpec::Skewed {
                n,
                k,
                k_heavy: k_heavy.ok_or_else(|| bad("missing kheavy".into()))?,
                heavy: heavy.ok_or_else(|| bad("missing heavy".into()))?,
                seed,
            }),
            "clustered" => Ok(GenSpec::Clustered {
                n,
                k,
                block: block.ok_or_else(|| bad("missing block".into()))?,
                seed,
            }),
            other => Err(bad(format!("unknown kind '{other}'"))),
        }
    }

    pub fn build(&self) -> Result<CooMatrix> {
        match *self {
            GenSpec::Uniform { n, k, seed } => gen_uniform(n, k, seed),
            GenSpec::Banded { n, k, seed } => gen_banded(n, k, seed),
            GenSpec::Skewed { n, k, k_heavy, heavy, seed } => {
                gen_skewed(n, k, k_heavy, heavy, seed)
            }
            GenSpec::Clustered { n, k, block, seed } => gen_clustered(n, k, block, seed),
        }
    }
}

impl std::fmt::Display for GenSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GenSpec::Uniform { n, k, seed } => write!(f, "uniform:n={n},k={k},seed={seed}"),
            GenSpec::Banded { n, k, seed } => write!(f, "banded:n={n},k={k},seed={seed}"),
            GenSpec::Skewed { n, k, k_heavy, heavy, seed } => {
                write!(f, "skewed:n={n},k={k},kheavy={k_heavy},heavy={heavy},seed={seed}")
            }
            GenSpec::Clustered { n, k, block, seed } => {
                write!(f, "clustered:n={n},k={k},block={block},seed={seed}")
            }
        }
    }
}
