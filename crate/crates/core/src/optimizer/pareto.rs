/// `a` dominates `b` when it is strictly lower in both objectives.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 < b.0 && a.1 < b.1
}

/// Indices of the non-dominated points, in input order. Non-finite points
/// (rejected solutions) are never part of the front.
///
/// Sorts by the first objective and sweeps groups of equal first objective,
/// comparing each group against the smallest second objective seen in
/// strictly-lower groups, so the cost is O(n log n).
pub fn front_indices(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).filter(|&i| points[i].0.is_finite() && points[i].1.is_finite()).collect();
    order.sort_by(|&i, &j| points[i].0.total_cmp(&points[j].0).then(i.cmp(&j)));
    let mut keep = Vec::new();
    let mut best_below = f64::INFINITY;
    let mut start = 0;
    while start < order.len() {
        let x = points[order[start]].0;
        let mut end = start;
        while end < order.len() && points[order[end]].0 == x {
            end += 1;
        }
        let mut group_min = f64::INFINITY;
        for &i in &order[start..end] {
            let y = points[i].1;
            if !(best_below < y) {
                keep.push(i);
            }
            group_min = group_min.min(y);
        }
        best_below = best_below.min(group_min);
        start = end;
    }
    keep.sort_unstable();
    keep
}
