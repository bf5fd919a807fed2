//! Independent oracles shared by several test targets.
#![allow(dead_code)]

use nalgebra::DMatrix;

/// Convex polygon `(1/N) Σ [−xᵢ, xᵢ]` built from all 2ᴺ signed vertex sums,
/// stored as counter-clockwise hull vertices.
pub struct Polygon {
    pub hull: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Polygon {
    pub fn zonotope(points: &[[f64; 2]]) -> Polygon {
        let n = points.len();
        let mut verts = Vec::with_capacity(1 << n);
        for mask in 0u32..(1 << n) {
            let mut v = [0.0; 2];
            for (i, p) in points.iter().enumerate() {
                let s = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                v[0] += s * p[0];
                v[1] += s * p[1];
            }
            verts.push([v[0] / n as f64, v[1] / n as f64]);
        }
        verts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        verts.dedup();
        // monotone chain
        let mut hull: Vec<[f64; 2]> = Vec::new();
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
                Box::new(verts.iter())
            } else {
                Box::new(verts.iter().rev())
            };
            for &p in iter {
                while hull.len() >= start + 2
                    && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
                {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        Polygon { hull }
    }

    /// Twice the signed area.
    pub fn area2(&self) -> f64 {
        let h = &self.hull;
        (0..h.len())
            .map(|i| {
                let a = h[i];
                let b = h[(i + 1) % h.len()];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum()
    }

    /// Gauge `max_e ⟨n_e, q⟩ / ⟨n_e, v_e⟩` over edges with outward normals.
    pub fn gauge(&self, q: [f64; 2]) -> f64 {
        let h = &self.hull;
        let mut g = 0.0f64;
        for i in 0..h.len() {
            let a = h[i];
            let b = h[(i + 1) % h.len()];
            let normal = [b[1] - a[1], a[0] - b[0]];
            let offset = normal[0] * a[0] + normal[1] * a[1];
            g = g.max((normal[0] * q[0] + normal[1] * q[1]) / offset);
        }
        g
    }
}

/// Smallest `Σᵢ ‖aᵢ − sᵢ â_{π(i)}‖` over every permutation π and sign vector s.
pub fn exhaustive_matching_cost(a: &DMatrix<f64>, a_hat: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    loop {
        for signs in 0u32..(1 << n) {
            let mut total = 0.0;
            for (i, &j) in perm.iter().enumerate() {
                let s = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
                let d = a.column(i) - a_hat.column(j) * s;
                total += d.norm();
            }
            best = best.min(total);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best
}

/// Lexicographic successor; false once the last permutation is reached.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Median by sorting (mean of the middle pair for even counts).
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// `1 − ½ ((x + 1.5)/1.5)^(1 − η)` for `x ≥ 0`, mirrored for `x < 0`.
pub fn source_cdf(eta: f64, x: f64) -> f64 {
    let tail = 0.5 * ((x.abs() + 1.5) / 1.5).powf(1.0 - eta);
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Largest gap between the empirical CDF of `draws` and `cdf`.
pub fn ks_distance(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = draws.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
