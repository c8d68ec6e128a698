#![allow(dead_code)]

use std::collections::HashSet;

use isocache::cache::AccessOutcome;

/// Straightforward LRU cache: one MRU-first vector per set and a set of
/// every line ever loaded. Slow, but hard to get wrong.
pub struct ReferenceCache {
    a: usize,
    w: u64,
    z: u64,
    sets: Vec<Vec<u64>>,
    seen: HashSet<u64>,
}

impl ReferenceCache {
    pub fn new(a: u64, w: u64, size: u64) -> Self {
        let z = size / (a * w);
        ReferenceCache {
            a: a as usize,
            w,
            z,
            sets: vec![Vec::new(); z as usize],
            seen: HashSet::new(),
        }
    }

    pub fn access(&mut self, address: u64) -> AccessOutcome {
        let line = address / self.w;
        let set = &mut self.sets[(line % self.z) as usize];
        if let Some(pos) = set.iter().position(|&l| l == line) {
            set.remove(pos);
            set.insert(0, line);
            return AccessOutcome::Hit;
        }
        set.insert(0, line);
        set.truncate(self.a);
        if self.seen.insert(line) {
            AccessOutcome::Cold
        } else {
            AccessOutcome::Replacement
        }
    }
}

/// Outcomes of `trace` on the reference model.
pub fn reference_outcomes(a: u64, w: u64, size: u64, trace: &[u64]) -> Vec<AccessOutcome> {
    let mut c = ReferenceCache::new(a, w, size);
    trace.iter().map(|&x| c.access(x)).collect()
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
