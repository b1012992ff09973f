//! Exact K-nearest-neighbor search over embedding vectors.

/// Returns up to `k` database indices for which `exclude` is false, in
/// ascending Euclidean distance to `query`; equal distances break toward the
/// lower index. Exact brute force: the databases here are a few thousand
/// vectors, where a full pass beats any index structure.
pub fn knn_search<V: AsRef<[f64]>>(
    query: &[f64],
    database: &[V],
    k: usize,
    exclude: impl Fn(usize) -> bool,
) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(database.len());
    for (i, v) in database.iter().enumerate() {
        if exclude(i) {
            continue;
        }
        let v = v.as_ref();
        debug_assert_eq!(v.len(), query.len());
        let mut d2 = 0.0;
        for (a, b) in query.iter().zip(v) {
            let d = a - b;
            d2 += d * d;
        }
        scored.push((d2, i));
    }
    scored.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    scored.into_iter().map(|(_, i)| i).collect()
}
