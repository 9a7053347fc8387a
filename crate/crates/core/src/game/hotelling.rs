//! Spatial competition on the unit square.

/// Market share of each firm under nearest-firm customer choice.
///
/// Customers are uniform on `[0,1]^2`, approximated by the midpoints of an
/// `m x m` grid. A cell equidistant (to within round-off) from several
/// closest firms is split equally among them.
pub fn market_shares(locations: &[&[f64]], m: usize) -> Vec<f64> {
    let n = locations.len();
    let mut counts = vec![0.0; n];
    let mut dist = vec![0.0; n];
    let h = 1.0 / m as f64;
    for a in 0..m {
        let px = (a as f64 + 0.5) * h;
        for b in 0..m {
            let py = (b as f64 + 0.5) * h;
            let mut best = f64::INFINITY;
            for (k, loc) in locations.iter().enumerate() {
                let dx = px - loc[0];
                let dy = py - loc[1];
                dist[k] = dx * dx + dy * dy;
                best = best.min(dist[k]);
            }
            let tol = 1e-12 * best.max(1e-12);
            let ties = dist.iter().filter(|&&d| d - best <= tol).count() as f64;
            for k in 0..n {
                if dist[k] - best <= tol {
                    counts[k] += 1.0 / ties;
                }
            }
        }
    }
    let cells = (m * m) as f64;
    counts.into_iter().map(|c| c / cells).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_location_splits_evenly() {
        let p = [0.5, 0.5];
        let s = market_shares(&[&p, &p], 201);
        assert!((s[0] - 0.5).abs() < 1e-12);
        assert!((s[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn corner_versus_center() {
        // Firm 1 owns the half-plane x + y <= 0.5, of area 1/8.
        let m = 201;
        let s = market_shares(&[&[0.0, 0.0], &[0.5, 0.5]], m);
        let tol = 2.0 / m as f64;
        assert!((s[0] - 0.125).abs() <= tol, "{s:?}");
        assert!((s[1] - 0.875).abs() <= tol, "{s:?}");
    }

    #[test]
    fn shares_sum_to_one() {
        let m = 101;
        let s = market_shares(&[&[0.1, 0.9], &[0.3, 0.3], &[0.8, 0.5]], m);
        let total: f64 = s.iter().sum();
        assert!((total - 1.0).abs() <= 2.0 / m as f64);
    }
}
