//! Bounded dual simplex for the gauge LP of a zonotope.
//!
//! The problem solved is
//!
//! ```text
//! maximize s   subject to   Σⱼ λⱼ aⱼ − s q̂ = 0,   −1 ≤ λⱼ ≤ 1,   s ≥ 0
//! ```
//!
//! over pre-scaled columns `aⱼ`. Internally it is written as a minimization of
//! `−s`. Every λ is boxed, so any basis containing `s` is dual feasible once
//! each nonbasic λ sits at the bound matching the sign of its reduced cost.
//! Starting from such a basis, dual simplex pivots with a bound-flipping
//! ratio test reach the optimum in a handful of passes over the columns.
//!
//! Artificial unit columns fixed at zero complete the starting basis when
//! needed; once they leave they never re-enter.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_REL_TOL: f64 = 1e-11;
const PIVOT_REL_TOL: f64 = 1e-9;
const REFRESH_EVERY: usize = 32;
const MAX_CONDITION: f64 = 1e12;
const SAMPLE: usize = 256;
const SAMPLE_MARGIN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
enum State {
    Basic = 0,
    Lower = 1,
    Upper = 2,
}

impl State {
    #[inline]
    fn side(self) -> f64 {
        // table lookup keeps the hot loops free of unpredictable branches
        const SIDE: [f64; 3] = [0.0, 1.0, -1.0];
        SIDE[self as usize]
    }
}

/// Outcome of one solve, in the solver's internal scaling.
#[derive(Debug, Clone)]
pub(crate) struct RawSolution {
    pub scale: f64,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
}

/// Reusable solver state for one set of columns. Consecutive solves start
/// from the previous optimal basis.
#[derive(Debug, Clone)]
pub(crate) struct DualSimplex {
    /// `m` columns of length `n`, one after another
    cols: Vec<f64>,
    /// the same columns stored coordinate-major, `n` slices of length `m`
    coords: Vec<f64>,
    n: usize,
    m: usize,
    q: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    state: Vec<State>,
    x: Vec<f64>,
    d: Vec<f64>,
    alpha: Vec<f64>,
    /// largest absolute column entry
    max_entry: f64,
    iterations: usize,
    have_basis: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Candidate {
    j: usize,
    ratio: f64,
    alpha: f64,
}

impl Candidate {
    fn order(a: &Candidate, b: &Candidate) -> Ordering {
        a.ratio.total_cmp(&b.ratio).then(a.j.cmp(&b.j))
    }
}

enum Stall {
    Singular,
    DualInfeasible,
}

impl DualSimplex {
    /// `cols` holds the columns one after another, `n` values each.
    pub fn new(n: usize, cols: Vec<f64>) -> Self {
        let mut lp = DualSimplex {
            cols: Vec::new(),
            coords: Vec::new(),
            n,
            m: 0,
            q: vec![0.0; n],
            basis: Vec::with_capacity(n),
            binv: vec![0.0; n * n],
            state: vec![State::Lower; n + 1],
            x: vec![0.0; n + 1],
            d: vec![0.0; n + 1],
            alpha: vec![0.0; 1],
            max_entry: 0.0,
            iterations: 0,
            have_basis: false,
        };
        lp.load(cols);
        lp
    }

    fn load(&mut self, cols: Vec<f64>) {
        let n = self.n;
        let m = cols.len() / n;
        self.max_entry = cols.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        self.cols = cols;
        self.m = m;
        self.coords.resize(self.cols.len(), 0.0);
        for (j, col) in self.cols.chunks_exact(n).enumerate() {
            for (k, v) in col.iter().enumerate() {
                self.coords[k * m + j] = *v;
            }
        }
        let total = m + 1 + n;
        self.state.clear();
        self.state.resize(total, State::Lower);
        self.x.clear();
        self.x.resize(total, 0.0);
        self.d.clear();
        self.d.resize(total, 0.0);
        self.alpha.clear();
        self.alpha.resize(m + 1, 0.0);
        self.basis.clear();
        self.have_basis = false;
    }

    fn s_var(&self) -> usize {
        self.m
    }

    fn is_artificial(&self, j: usize) -> bool {
        j > self.m
    }

    fn bounds(&self, j: usize) -> (f64, f64) {
        if j < self.m {
            (-1.0, 1.0)
        } else if j == self.m {
            (0.0, f64::INFINITY)
        } else {
            (0.0, 0.0)
        }
    }

    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    fn column_vec(&self, j: usize) -> Vec<f64> {
        if j < self.m {
            self.col(j).to_vec()
        } else if j == self.m {
            self.q.iter().map(|v| -v).collect()
        } else {
            let mut e = vec![0.0; self.n];
            e[j - self.m - 1] = 1.0;
            e
        }
    }

    /// Solves for the query `q̂` (unit infinity norm, assumed inside the span
    /// of the columns).
    ///
    /// With a `hint` (an approximate optimal dual direction) the starting
    /// basis is built from the columns most nearly orthogonal to it;
    /// otherwise the previous basis is reused when there is one.
    pub fn solve(
        &mut self,
        q: &[f64],
        hint: Option<&[f64]>,
        iteration_cap: usize,
    ) -> Result<RawSolution> {
        self.q.copy_from_slice(q);
        self.iterations = 0;
        let warm = match hint {
            Some(u) => self.crash_basis(u),
            None => self.have_basis && self.warm_basis(),
        };
        if !warm {
            self.cold_basis();
        }
        match self.run(iteration_cap) {
            Ok(()) => {}
            Err(Some(stall)) if warm => {
                let _ = stall;
                self.cold_basis();
                self.run(iteration_cap).map_err(|e| self.failure(e))?;
            }
            Err(e) => return Err(self.failure(e)),
        }
        self.have_basis = true;
        let coefficients = self.x[..self.m]
            .iter()
            .map(|v| v.clamp(-1.0, 1.0))
            .collect();
        Ok(RawSolution {
            scale: self.x[self.s_var()].max(0.0),
            coefficients,
            iterations: self.iterations,
        })
    }

    fn failure(&self, e: Option<Stall>) -> Error {
        let reason = match e {
            Some(Stall::Singular) => "basis became singular",
            Some(Stall::DualInfeasible) => "lost dual feasibility",
            None => "iteration limit exceeded",
        };
        Error::SolverFailure {
            iterations: self.iterations,
            reason: reason.into(),
        }
    }

    fn cold_basis(&mut self) {
        let n = self.n;
        let pivot = self
            .q
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        self.basis.clear();
        self.basis.push(self.s_var());
        for k in (0..n).filter(|&k| k != pivot) {
            self.basis.push(self.m + 1 + k);
        }
        for st in self.state.iter_mut() {
            *st = State::Lower;
        }
        for &b in &self.basis {
            self.state[b] = State::Basic;
        }
        for j in 0..self.m {
            self.x[j] = -1.0;
        }
        for j in self.m..self.x.len() {
            self.x[j] = 0.0;
        }
    }

    /// Basis of `s` plus the columns closest to the hyperplane `u ⊥`, chosen
    /// greedily to stay linearly independent of `q̂` and each other.
    fn crash_basis(&mut self, u: &[f64]) -> bool {
        let n = self.n;
        let mut scored: Vec<(f64, usize)> = (0..self.m)
            .filter_map(|j| {
                let c = self.col(j);
                let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                (norm > 0.0).then(|| {
                    let dot: f64 = c.iter().zip(u).map(|(a, b)| a * b).sum();
                    (dot.abs() / norm, j)
                })
            })
            .collect();
        let take = scored.len().min(4 * n + 8);
        if take == 0 {
            return false;
        }
        if take < scored.len() {
            scored.select_nth_unstable_by(take - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            scored.truncate(take);
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
        let push_independent = |v: &[f64], ortho: &mut Vec<Vec<f64>>| -> bool {
            let norm0 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let mut w = v.to_vec();
            for o in ortho.iter() {
                let p: f64 = w.iter().zip(o).map(|(a, b)| a * b).sum();
                for (wi, oi) in w.iter_mut().zip(o) {
                    *wi -= p * oi;
                }
            }
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-6 * norm0 {
                w.iter_mut().for_each(|a| *a /= norm);
                ortho.push(w);
                true
            } else {
                false
            }
        };
        let q = self.q.clone();
        push_independent(&q, &mut ortho);
        let mut basis = vec![self.s_var()];
        for &(_, j) in &scored {
            if basis.len() == n {
                break;
            }
            if push_independent(self.col(j), &mut ortho) {
                basis.push(j);
            }
        }
        for k in 0..n {
            if basis.len() == n {
                break;
            }
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            if push_independent(&e, &mut ortho) {
                basis.push(self.m + 1 + k);
            }
        }
        if basis.len() != n {
            return false;
        }
        self.basis = basis;
        for st in self.state.iter_mut() {
            *st = State::Lower;
        }
        for &b in &self.basis {
            self.state[b] = State::Basic;
        }
        for j in self.m..self.x.len() {
            if self.state[j] != State::Basic {
                self.x[j] = 0.0;
            }
        }
        true
    }

    /// Reuse the previous basis with the new `s` column. Returns false when
    /// that basis cannot be used.
    fn warm_basis(&mut self) -> bool {
        let s = self.s_var();
        if !self.basis.contains(&s) {
            return false;
        }
        for j in self.m + 1..self.x.len() {
            if self.state[j] != State::Basic {
                self.x[j] = 0.0;
            }
        }
        true
    }

    fn factor(&mut self) -> std::result::Result<(), Stall> {
        let n = self.n;
        let mut b = DMatrix::<f64>::zeros(n, n);
        for (r, &j) in self.basis.iter().enumerate() {
            let c = self.column_vec(j);
            for i in 0..n {
                b[(i, r)] = c[i];
            }
        }
        let norm_b = one_norm(&b);
        let inv = b.try_inverse().ok_or(Stall::Singular)?;
        if !(norm_b * one_norm(&inv) < MAX_CONDITION) {
            return Err(Stall::Singular);
        }
        for r in 0..n {
            for c in 0..n {
                self.binv[r * n + c] = inv[(r, c)];
            }
        }
        Ok(())
    }

    /// Refactor, recompute duals and reduced costs, move nonbasic λ to the
    /// bound their reduced cost asks for, then recompute basic values.
    fn refresh(&mut self) -> std::result::Result<(), Stall> {
        self.factor()?;
        let n = self.n;
        let s = self.s_var();
        let mut y = vec![0.0; n];
        if let Some(rs) = self.basis.iter().position(|&j| j == s) {
            for c in 0..n {
                y[c] = -self.binv[rs * n + c];
            }
        }
        for j in 0..self.m {
            if self.state[j] == State::Basic {
                continue;
            }
            let col = self.col(j);
            let mut dot = 0.0;
            let mut mag = 0.0;
            for k in 0..n {
                let t = y[k] * col[k];
                dot += t;
                mag += t.abs();
            }
            let dj = -dot;
            self.d[j] = dj;
            let tol = DUAL_REL_TOL * mag;
            if dj > tol {
                self.state[j] = State::Lower;
            } else if dj < -tol {
                self.state[j] = State::Upper;
            }
            self.x[j] = if self.state[j] == State::Upper {
                1.0
            } else {
                -1.0
            };
        }
        if self.state[s] != State::Basic {
            let yq: f64 = y.iter().zip(&self.q).map(|(a, b)| a * b).sum();
            let ds = -1.0 + yq;
            self.d[s] = ds;
            if ds < -PRIMAL_TOL * (1.0 + yq.abs()) {
                return Err(Stall::DualInfeasible);
            }
            self.x[s] = 0.0;
        }
        self.recompute_basic_values();
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let n = self.n;
        let mut rhs = vec![0.0; n];
        for j in 0..self.m {
            if self.state[j] != State::Basic {
                let v = self.x[j];
                for (r, c) in rhs.iter_mut().zip(self.col(j)) {
                    *r -= v * c;
                }
            }
        }
        // s and artificials are nonbasic only at zero
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                acc += self.binv[r * n + c] * rhs[c];
            }
            let j = self.basis[r];
            self.x[j] = acc;
        }
    }

    fn choose_leaving(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (r, &j) in self.basis.iter().enumerate() {
            let (lo, hi) = self.bounds(j);
            let v = self.x[j];
            let infeas = if v < lo - PRIMAL_TOL {
                lo - v
            } else if v > hi + PRIMAL_TOL {
                v - hi
            } else {
                continue;
            };
            best = match best {
                None => Some((r, infeas)),
                Some((br, bi)) => {
                    let better = if bland {
                        j < self.basis[br]
                    } else {
                        infeas > bi
                    };
                    if better {
                        Some((r, infeas))
                    } else {
                        Some((br, bi))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    /// Breakpoint of column `j` for the current row, if it limits the step.
    #[inline]
    fn breakpoint(&self, j: usize, sdir: f64, piv_tol: f64) -> Option<Candidate> {
        let aj = self.alpha[j];
        if j == self.m {
            let t = -sdir * aj;
            return (t > piv_tol).then(|| Candidate {
                j,
                ratio: self.d[j].max(0.0) / t,
                alpha: aj,
            });
        }
        // λⱼ at its lower bound (side +1) limits the step when sdir·αⱼ < 0,
        // at its upper bound (side −1) when sdir·αⱼ > 0
        let side = self.state[j].side();
        let t = -side * sdir * aj;
        (t > piv_tol).then(|| Candidate {
            j,
            ratio: (side * self.d[j]).max(0.0) / t,
            alpha: aj,
        })
    }

    fn sample_cut(&self, sdir: f64, piv_tol: f64, slope: f64, s_free: bool) -> Option<f64> {
        let m = self.m;
        let stride = m / SAMPLE;
        let mut sample: Vec<Candidate> = (0..m)
            .step_by(stride)
            .filter_map(|j| self.breakpoint(j, sdir, piv_tol))
            .collect();
        if s_free {
            sample.extend(self.breakpoint(m, sdir, piv_tol));
        }
        sample.sort_unstable_by(Candidate::order);
        let mut cum = 0.0;
        for (i, c) in sample.iter().enumerate() {
            cum += 2.0 * c.alpha.abs() * stride as f64;
            if c.j >= m || cum >= slope {
                return sample.get(i + SAMPLE_MARGIN).map(|c| c.ratio);
            }
        }
        None
    }

    /// All breakpoints with ratio at most `cut`.
    fn collect_candidates(
        &self,
        cands: &mut Vec<Candidate>,
        flags: &mut Vec<u8>,
        sdir: f64,
        piv_tol: f64,
        s_free: bool,
        cut: f64,
    ) {
        let m = self.m;
        cands.clear();
        if cut == f64::INFINITY {
            // branch-free: every column is written, only candidates advance
            cands.resize(m + 1, Candidate::default());
            let mut count = 0;
            for (j, ((st, &dj), &aj)) in self.state[..m]
                .iter()
                .zip(&self.d[..m])
                .zip(&self.alpha[..m])
                .enumerate()
            {
                let side = st.side();
                let t = -side * sdir * aj;
                cands[count] = Candidate {
                    j,
                    ratio: (side * dj).max(0.0) / t,
                    alpha: aj,
                };
                count += (t > piv_tol) as usize;
            }
            cands.truncate(count);
        } else {
            // flag pass first (vectorizes), then a scan that rarely branches
            flags.resize(m, 0);
            for (f, ((st, &dj), &aj)) in flags.iter_mut().zip(
                self.state[..m]
                    .iter()
                    .zip(&self.d[..m])
                    .zip(&self.alpha[..m]),
            ) {
                let side = st.side();
                let t = -side * sdir * aj;
                *f = ((t > piv_tol) & ((side * dj).max(0.0) <= cut * t)) as u8;
            }
            for (j, _) in flags.iter().enumerate().filter(|(_, f)| **f != 0) {
                let side = self.state[j].side();
                let aj = self.alpha[j];
                cands.push(Candidate {
                    j,
                    ratio: (side * self.d[j]).max(0.0) / (-side * sdir * aj),
                    alpha: aj,
                });
            }
        }
        if s_free {
            if let Some(c) = self.breakpoint(m, sdir, piv_tol).filter(|c| c.ratio <= cut) {
                cands.push(c);
            }
        }
    }

    fn run(&mut self, iteration_cap: usize) -> std::result::Result<(), Option<Stall>> {
        let n = self.n;
        let m = self.m;
        let s = self.s_var();
        let bland_after = 10 * (m + n);
        self.refresh().map_err(Some)?;
        let mut since_refresh = 0usize;
        let mut cands: Vec<Candidate> = Vec::new();
        let mut flags: Vec<u8> = Vec::new();
        let mut rho = vec![0.0; n];
        loop {
            if self.iterations >= iteration_cap {
                return Err(None);
            }
            let bland = self.iterations >= bland_after;
            let Some(r) = self.choose_leaving(bland) else {
                if since_refresh == 0 {
                    return Ok(());
                }
                self.refresh().map_err(Some)?;
                since_refresh = 0;
                continue;
            };
            let leaving = self.basis[r];
            let (lo, hi) = self.bounds(leaving);
            let xr = self.x[leaving];
            let (sdir, infeas, target) = if xr < lo {
                (1.0, lo - xr, lo)
            } else {
                (-1.0, xr - hi, hi)
            };

            rho.copy_from_slice(&self.binv[r * n..(r + 1) * n]);
            let alpha = &mut self.alpha[..m];
            row_combination(alpha, &self.coords, &rho);
            // |αⱼ| ≤ ‖ρ‖₁ maxⱼ ‖aⱼ‖∞ stands in for the row maximum
            let mut alpha_max = rho.iter().map(|v| v.abs()).sum::<f64>() * self.max_entry;
            let s_free = self.state[s] != State::Basic;
            if s_free {
                let a: f64 = -rho.iter().zip(&self.q).map(|(p, c)| p * c).sum::<f64>();
                self.alpha[s] = a;
                alpha_max = alpha_max.max(a.abs());
            }
            let piv_tol = PIVOT_REL_TOL * alpha_max;

            // Guess from a strided sample of columns a ratio below which the
            // stop lies, collect only the breakpoints under it, and fall back
            // to all of them when the guess was too low.
            let cut = if m > 8 * SAMPLE && !bland {
                self.sample_cut(sdir, piv_tol, infeas, s_free)
            } else {
                None
            };
            self.collect_candidates(
                &mut cands,
                &mut flags,
                sdir,
                piv_tol,
                s_free,
                cut.unwrap_or(f64::INFINITY),
            );
            let slope = if bland { 0.0 } else { infeas };
            let mut found = find_stop(&mut cands, m, slope);
            if found.is_none() && cut.is_some() {
                self.collect_candidates(
                    &mut cands,
                    &mut flags,
                    sdir,
                    piv_tol,
                    s_free,
                    f64::INFINITY,
                );
                found = find_stop(&mut cands, m, slope);
            }
            let Some(stop) = found else {
                if since_refresh > 0 {
                    self.refresh().map_err(Some)?;
                    since_refresh = 0;
                    continue;
                }
                return Err(Some(Stall::DualInfeasible));
            };

            // among near-ties at the stopping ratio take the largest pivot
            let tau0 = cands[stop].ratio;
            let mut chosen = stop;
            if !bland {
                let limit = tau0 + 1e-12 * (1.0 + tau0);
                for (k, c) in cands.iter().enumerate().skip(stop + 1) {
                    if c.ratio <= limit && c.alpha.abs() > cands[chosen].alpha.abs() {
                        chosen = k;
                    }
                }
            }
            let entering = cands[chosen].j;
            let tau = cands[chosen].ratio;

            // duals
            let step = sdir * tau;
            for (dj, aj) in self.d[..m].iter_mut().zip(&self.alpha[..m]) {
                *dj += step * aj;
            }
            if s_free {
                self.d[s] += step * self.alpha[s];
            }
            for &j in &self.basis {
                self.d[j] = 0.0;
            }
            self.d[leaving] = step;
            self.d[entering] = 0.0;

            // bound flips of the candidates passed before the stop
            let mut shift = vec![0.0; n];
            let mut flipped = false;
            for c in &cands[..stop] {
                let j = c.j;
                let old = self.x[j];
                let new = -old;
                self.x[j] = new;
                self.state[j] = if new > 0.0 {
                    State::Upper
                } else {
                    State::Lower
                };
                for (sh, v) in shift.iter_mut().zip(self.col(j)) {
                    *sh += (new - old) * v;
                }
                flipped = true;
            }
            if flipped {
                for i in 0..n {
                    let mut acc = 0.0;
                    for c in 0..n {
                        acc += self.binv[i * n + c] * shift[c];
                    }
                    let j = self.basis[i];
                    self.x[j] -= acc;
                }
            }

            // primal pivot
            let col_q = self.column_vec(entering);
            let mut aq = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += self.binv[i * n + c] * col_q[c];
                }
                aq[i] = acc;
            }
            let piv = aq[r];
            if piv.abs() <= f64::EPSILON * alpha_max.max(1.0) {
                self.refresh().map_err(Some)?;
                since_refresh = 0;
                self.iterations += 1;
                continue;
            }
            let theta = (self.x[leaving] - target) / piv;
            for i in 0..n {
                let j = self.basis[i];
                self.x[j] -= theta * aq[i];
            }
            self.x[entering] += theta;
            self.x[leaving] = target;
            self.state[leaving] = if sdir > 0.0 || self.is_artificial(leaving) || leaving == s {
                State::Lower
            } else {
                State::Upper
            };
            self.state[entering] = State::Basic;
            self.basis[r] = entering;

            // B⁻¹ update
            let inv_piv = 1.0 / piv;
            for c in 0..n {
                self.binv[r * n + c] *= inv_piv;
            }
            for i in 0..n {
                if i == r || aq[i] == 0.0 {
                    continue;
                }
                let f = aq[i];
                for c in 0..n {
                    self.binv[i * n + c] -= f * self.binv[r * n + c];
                }
            }

            self.iterations += 1;
            since_refresh += 1;
            if since_refresh >= REFRESH_EVERY {
                self.refresh().map_err(Some)?;
                since_refresh = 0;
            }
        }
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Bound-flipping ratio test. Walking the breakpoints in increasing ratio,
/// each λ passed costs `2|αⱼ|` of the remaining `slope`; the walk stops at
/// the first one that would exhaust it, or at `s`. Rearranges `cands` so that
/// the breakpoints passed come first, followed by the stopping one, whose
/// index is returned; everything after it orders later. Runs a weighted
/// quickselect instead of sorting.
fn find_stop(cands: &mut [Candidate], m: usize, mut slope: f64) -> Option<usize> {
    let mut lo = 0;
    let mut hi = cands.len();
    while hi > lo {
        let len = hi - lo;
        let mid = lo + len / 2;
        let last = hi - 1;
        // median of three to `last`
        if Candidate::order(&cands[mid], &cands[lo]).is_lt() {
            cands.swap(mid, lo);
        }
        if Candidate::order(&cands[last], &cands[lo]).is_lt() {
            cands.swap(last, lo);
        }
        if Candidate::order(&cands[mid], &cands[last]).is_lt() {
            cands.swap(mid, last);
        }
        let pivot = cands[last];
        let mut store = lo;
        let mut weight = 0.0;
        let mut has_s = false;
        // branch-free Lomuto partition
        for i in lo..last {
            let c = cands[i];
            let lt = (c.ratio < pivot.ratio) | ((c.ratio == pivot.ratio) & (c.j < pivot.j));
            cands[i] = cands[store];
            cands[store] = c;
            store += lt as usize;
            weight += if lt { 2.0 * c.alpha.abs() } else { 0.0 };
            has_s |= lt & (c.j >= m);
        }
        cands.swap(store, last);
        if store > lo && (has_s || slope - weight <= 0.0) {
            hi = store;
            continue;
        }
        slope -= weight;
        let p = cands[store];
        let dec = 2.0 * p.alpha.abs();
        if p.j >= m || slope - dec <= 0.0 {
            return Some(store);
        }
        slope -= dec;
        lo = store + 1;
    }
    None
}

/// `out = Σₖ ρₖ rowₖ` over the coordinate-major `coords`, four rows per pass.
fn row_combination(out: &mut [f64], coords: &[f64], rho: &[f64]) {
    let m = out.len();
    out.fill(0.0);
    let rows: Vec<&[f64]> = coords.chunks_exact(m).collect();
    let mut k = 0;
    while k + 4 <= rho.len() {
        let (p0, p1, p2, p3) = (rho[k], rho[k + 1], rho[k + 2], rho[k + 3]);
        let (r0, r1, r2, r3) = (rows[k], rows[k + 1], rows[k + 2], rows[k + 3]);
        for j in 0..m {
            out[j] += p0 * r0[j] + p1 * r1[j] + p2 * r2[j] + p3 * r3[j];
        }
        k += 4;
    }
    for (&p, row) in rho[k..].iter().zip(&rows[k..]) {
        for (o, c) in out.iter_mut().zip(*row) {
            *o += p * c;
        }
    }
}
