//! Maximum-weight assignment of coefficients to bands with exact band counts.
//!
//! Each coefficient `j` goes to exactly one band; band `k` receives exactly
//! `theta[k]` coefficients; the objective is `Σ_j value[j][band(j)]`. The
//! problem is a balanced transportation problem with unit supplies. Starting
//! from a greedy assignment we cancel improving cycles on the band graph,
//! where the arc `a -> b` moves the cheapest-to-move coefficient from band
//! `a` to band `b`. With no improving cycle left the assignment is optimal,
//! and shortest-path potentials on the same graph give dual prices.

/// Optimal assignment together with a dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    pub value: f64,
    /// Band position of each coefficient.
    pub band: Vec<usize>,
    /// Band prices, normalised so that the price of `base` is 0.
    pub w: Vec<f64>,
    /// Coefficient prices, `z[j] = max_k(value[j][k] - w[k])`.
    pub z: Vec<f64>,
}

fn tolerance(values: &[&[f64]]) -> f64 {
    let scale = values
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    1e-12 * scale
}

/// Arc weights of the band graph: `arc[a][b] = (loss, j)` where `loss` is the
/// smallest `value[j][a] - value[j][b]` over coefficients in band `a`.
fn arcs(values: &[&[f64]], band: &[usize], k: usize) -> Vec<Vec<Option<(f64, usize)>>> {
    let mut arc = vec![vec![None; k]; k];
    for (j, row) in values.iter().enumerate() {
        let a = band[j];
        for b in 0..k {
            if b == a {
                continue;
            }
            let loss = row[a] - row[b];
            match arc[a][b] {
                Some((l, _)) if l <= loss => {}
                _ => arc[a][b] = Some((loss, j)),
            }
        }
    }
    arc
}

/// Bellman-Ford from a virtual source joined to every band. Returns the
/// distances and, if one exists, a negative cycle as a list of bands.
fn shortest(arc: &[Vec<Option<(f64, usize)>>], tol: f64) -> (Vec<f64>, Option<Vec<usize>>) {
    let k = arc.len();
    let mut dist = vec![0.0; k];
    let mut pred: Vec<Option<usize>> = vec![None; k];
    let mut last = None;
    for _ in 0..k {
        last = None;
        for a in 0..k {
            for b in 0..k {
                if let Some((w, _)) = arc[a][b] {
                    if dist[a] + w < dist[b] - tol {
                        dist[b] = dist[a] + w;
                        pred[b] = Some(a);
                        last = Some(b);
                    }
                }
            }
        }
        if last.is_none() {
            return (dist, None);
        }
    }
    // a relaxation in round k proves a negative cycle reachable through pred
    let mut v = last.expect("relaxed in the final round");
    for _ in 0..k {
        v = pred[v].expect("relaxed nodes have predecessors");
    }
    let mut cycle = vec![v];
    let mut u = pred[v].expect("cycle node");
    while u != v {
        cycle.push(u);
        u = pred[u].expect("cycle node");
    }
    cycle.reverse();
    (dist, Some(cycle))
}

/// Greedy start: outermost bands first, each taking the unassigned
/// coefficients with the largest value in that band.
fn greedy(values: &[&[f64]], theta: &[usize], base: usize) -> Vec<usize> {
    let k = theta.len();
    let n = values.len();
    let mut band = vec![usize::MAX; n];
    let mut order: Vec<usize> = (0..k).filter(|&b| b != base).collect();
    order.sort_by_key(|&b| std::cmp::Reverse(b.abs_diff(base)));
    order.push(base);
    for b in order {
        let mut free: Vec<usize> = (0..n).filter(|&j| band[j] == usize::MAX).collect();
        free.sort_by(|&x, &y| values[y][b].total_cmp(&values[x][b]).then(x.cmp(&y)));
        for &j in free.iter().take(theta[b]) {
            band[j] = b;
        }
    }
    band
}

/// Solves the assignment for `values[j][k]` and counts `theta[k]`, with
/// `Σ theta = values.len()`.
pub fn solve(values: &[&[f64]], theta: &[usize], base: usize) -> Transport {
    let k = theta.len();
    let n = values.len();
    debug_assert_eq!(theta.iter().sum::<usize>(), n);
    debug_assert!(values.iter().all(|r| r.len() == k));
    let tol = tolerance(values);
    let mut band = greedy(values, theta, base);
    // each cancellation gains more than `tol`; the cap only guards rounding
    let mut budget = 64 + 8 * n * k;
    let dist = loop {
        let arc = arcs(values, &band, k);
        match shortest(&arc, tol) {
            (d, None) => break d,
            (d, Some(_)) if budget == 0 => break d,
            (_, Some(cycle)) => {
                budget -= 1;
                let moves: Vec<(usize, usize)> = (0..cycle.len())
                    .map(|i| {
                        let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                        (arc[a][b].expect("cycle arc").1, b)
                    })
                    .collect();
                for (j, b) in moves {
                    band[j] = b;
                }
            }
        }
    };
    let value = (0..n).map(|j| values[j][band[j]]).sum();
    // z_j + w_k >= value[j][k] with equality on the assigned band
    let shift = -dist[base];
    let w: Vec<f64> = dist.iter().map(|d| -d - shift).collect();
    let z: Vec<f64> = (0..n).map(|j| values[j][band[j]] - w[band[j]]).collect();
    Transport { value, band, w, z }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn brute(values: &[Vec<f64>], theta: &[usize]) -> f64 {
        let n = values.len();
        let k = theta.len();
        let mut best = f64::NEG_INFINITY;
        let mut a = vec![0usize; n];
        loop {
            let mut count = vec![0; k];
            for &b in &a {
                count[b] += 1;
            }
            if count == theta {
                best = best.max((0..n).map(|j| values[j][a[j]]).sum());
            }
            let mut i = 0;
            while i < n {
                a[i] += 1;
                if a[i] < k {
                    break;
                }
                a[i] = 0;
                i += 1;
            }
            if i == n {
                return best;
            }
        }
    }

    fn refs(v: &[Vec<f64>]) -> Vec<&[f64]> {
        v.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn empty_problem() {
        let t = solve(&[], &[0, 0, 0], 1);
        assert_eq!(t.value, 0.0);
        assert!(t.band.is_empty());
    }

    #[test]
    fn greedy_start_can_be_improved() {
        // greedy fills band 0 first and takes j0 there, leaving 5 + 0;
        // one cancelled cycle gives 100 + 4
        let v = vec![vec![5.0, 0.0, 100.0], vec![4.0, 0.0, 0.0]];
        let t = solve(&refs(&v), &[1, 0, 1], 1);
        assert_eq!(t.value, 104.0);
        assert_eq!(t.band, vec![2, 0]);
    }

    #[test]
    fn random_problems_match_brute_force_and_duals_certify() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3000 {
            let k = rng.gen_range(1..=5);
            let n = rng.gen_range(0..=7);
            let base = rng.gen_range(0..k);
            let values: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..k)
                        .map(|b| if b == base { 0.0 } else { rng.gen_range(-20..=20) as f64 })
                        .collect()
                })
                .collect();
            let mut theta = vec![0; k];
            for _ in 0..n {
                theta[rng.gen_range(0..k)] += 1;
            }
            let t = solve(&refs(&values), &theta, base);
            assert_eq!(t.value, brute(&values, &theta), "{values:?} {theta:?}");
            let mut count = vec![0; k];
            for &b in &t.band {
                count[b] += 1;
            }
            assert_eq!(count, theta);
            assert_eq!(t.w[base], 0.0);
            for j in 0..n {
                for b in 0..k {
                    assert!(t.z[j] + t.w[b] >= values[j][b] - 1e-9);
                }
                assert!(t.z[j] >= -1e-9);
            }
            let dual: f64 = t.z.iter().sum::<f64>() + (0..k).map(|b| theta[b] as f64 * t.w[b]).sum::<f64>();
            assert!((dual - t.value).abs() < 1e-9);
        }
    }
}
