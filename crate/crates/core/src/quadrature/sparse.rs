//! Smolyak sparse grids on the unit cube built from nested Clenshaw–Curtis
//! rules.
//!
//! Level `l` of the 1D rule has a single midpoint for `l = 0` and `2^l + 1`
//! Chebyshev extrema otherwise, so every coarser rule is a subset of a finer
//! one. The combination technique sums signed tensor rules; weights of
//! coinciding points are merged so each distinct point is sampled once.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

/// Clenshaw–Curtis rule of the given level on `[0, 1]`.
pub(crate) fn clenshaw_curtis(level: u32) -> (Vec<f64>, Vec<f64>) {
    if level == 0 {
        return (vec![0.5], vec![1.0]);
    }
    let n = 1usize << level;
    let nf = n as f64;
    let mut x = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    for j in 0..=n {
        x.push(0.5 * (1.0 - (PI * j as f64 / nf).cos()));
        let mut s = 0.0;
        for k in 1..=n / 2 {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            s += b / (4.0 * (k * k) as f64 - 1.0) * (2.0 * PI * (k * j) as f64 / nf).cos();
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        // Halved: the textbook weights live on [-1, 1].
        w.push(0.5 * c / nf * (1.0 - s));
    }
    (x, w)
}

/// Merged point set of an isotropic Smolyak rule on `[0, 1]^D`.
#[derive(Debug, Clone)]
pub struct SparseGrid<const D: usize> {
    pub level: u32,
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
}

impl<const D: usize> SparseGrid<D> {
    pub fn new(level: u32) -> Self {
        let max_level = level;
        let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..=max_level).map(clenshaw_curtis).collect();
        let canonical = |l: u32, j: usize| -> u64 {
            if max_level == 0 {
                0
            } else if l == 0 {
                1u64 << (max_level - 1)
            } else {
                (j as u64) << (max_level - l)
            }
        };

        let mut merged: HashMap<[u64; D], f64> = HashMap::new();
        let lo = (level as i64 - D as i64 + 1).max(0) as u32;
        for_each_multi_index::<D>(level, &mut |idx: &[u32; D]| {
            let sum: u32 = idx.iter().sum();
            if sum < lo {
                return;
            }
            let q = (level - sum) as u64;
            let coeff = binomial(D as u64 - 1, q) as f64 * if q % 2 == 0 { 1.0 } else { -1.0 };
            let mut counters = [0usize; D];
            loop {
                let mut key = [0u64; D];
                let mut w = coeff;
                for d in 0..D {
                    let l = idx[d];
                    key[d] = canonical(l, counters[d]);
                    w *= rules[l as usize].1[counters[d]];
                }
                *merged.entry(key).or_insert(0.0) += w;

                let mut d = 0;
                loop {
                    if d == D {
                        return;
                    }
                    counters[d] += 1;
                    if counters[d] < rules[idx[d] as usize].0.len() {
                        break;
                    }
                    counters[d] = 0;
                    d += 1;
                }
            }
        });

        // Deterministic order regardless of hash iteration.
        let ordered: BTreeMap<[u64; D], f64> = merged.into_iter().filter(|(_, w)| *w != 0.0).collect();
        let finest = &rules[max_level as usize].0;
        let mut points = Vec::with_capacity(ordered.len());
        let mut weights = Vec::with_capacity(ordered.len());
        for (key, w) in ordered {
            let mut p = [0.0; D];
            for d in 0..D {
                p[d] = finest[key[d] as usize];
            }
            points.push(p);
            weights.push(w);
        }
        Self {
            level,
            points,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn for_each_multi_index<const D: usize>(max_sum: u32, f: &mut dyn FnMut(&[u32; D])) {
    fn rec<const D: usize>(pos: usize, left: u32, cur: &mut [u32; D], f: &mut dyn FnMut(&[u32; D])) {
        if pos == D {
            f(cur);
            return;
        }
        for l in 0..=left {
            cur[pos] = l;
            rec::<D>(pos + 1, left - l, cur, f);
        }
        cur[pos] = 0;
    }
    let mut cur = [0u32; D];
    rec::<D>(0, max_sum, &mut cur, f);
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Shared 3D grid for a level; built once per level.
pub fn sparse_grid_3d(level: u32) -> Arc<SparseGrid<3>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<SparseGrid<3>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(g) = cache.read().expect("grid cache poisoned").get(&level) {
        return Arc::clone(g);
    }
    let grid = Arc::new(SparseGrid::<3>::new(level));
    let mut guard = cache.write().expect("grid cache poisoned");
    Arc::clone(guard.entry(level).or_insert(grid))
}

/// Shared 2D grid for a level.
pub fn sparse_grid_2d(level: u32) -> Arc<SparseGrid<2>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<SparseGrid<2>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(g) = cache.read().expect("grid cache poisoned").get(&level) {
        return Arc::clone(g);
    }
    let grid = Arc::new(SparseGrid::<2>::new(level));
    let mut guard = cache.write().expect("grid cache poisoned");
    Arc::clone(guard.entry(level).or_insert(grid))
}
