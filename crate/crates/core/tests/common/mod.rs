//! Strategies shared by the integration tests.

use proptest::prelude::*;
use sfpd::rational::ratio;
use sfpd::Instance;

/// Small instances whose costs come from a coarse grid, so simultaneous
/// tight arcs are common. A spanning path keeps every pair connected.
pub fn small_instance(max_n: usize, max_extra: usize, max_k: usize) -> impl Strategy<Value = Instance> {
    (2..=max_n)
        .prop_flat_map(move |n| {
            let path = prop::collection::vec((1i64..=6, 1i64..=2), n - 1);
            let extra = prop::collection::vec((0..n, 0..n, 1i64..=6, 1i64..=2), 0..=max_extra);
            let pairs = prop::collection::vec((0..n, 0..n), 1..=max_k);
            (Just(n), path, extra, pairs)
        })
        .prop_filter_map("needs a pair of distinct terminals", |(n, path, extra, pairs)| {
            let mut edges: Vec<(usize, usize, _)> = path
                .into_iter()
                .enumerate()
                .map(|(i, (p, q))| (i, i + 1, ratio(p, q)))
                .collect();
            for (u, v, p, q) in extra {
                let key = (u.min(v), u.max(v));
                if u != v && !edges.iter().any(|&(a, b, _)| (a, b) == key) {
                    edges.push((key.0, key.1, ratio(p, q)));
                }
            }
            let mut chosen: Vec<(usize, usize)> = Vec::new();
            for (s, t) in pairs {
                let key = (s.min(t), s.max(t));
                if s != t && !chosen.iter().any(|&(a, b)| (a.min(b), a.max(b)) == key) {
                    chosen.push((s, t));
                }
            }
            if chosen.is_empty() {
                return None;
            }
            Instance::new(n, edges, chosen).ok()
        })
}
