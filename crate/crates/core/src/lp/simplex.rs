//! Reference LP solver: bounded-variable two-phase revised simplex with an
//! explicit basis inverse, Dantzig pricing, and Bland's rule as the
//! anti-cycling fallback. Deterministic given identical input.

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpSolution, LpSolver, LpStatus, Relation};

#[derive(Debug, Clone)]
pub struct SimplexSolver {
    pub feas_tol: f64,
    pub opt_tol: f64,
    /// Smallest pivot magnitude accepted in the ratio test.
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_trigger: usize,
    /// Hard iteration cap as a multiple of (rows + cols).
    pub max_iter_factor: usize,
}

impl Default for SimplexSolver {
    fn default() -> Self {
        SimplexSolver {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            pivot_tol: 1e-9,
            bland_trigger: 40,
            max_iter_factor: 60,
        }
    }
}

impl LpSolver for SimplexSolver {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution> {
        Worker::new(self, lp).run()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Worker<'a> {
    cfg: &'a SimplexSolver,
    lp: &'a LinearProgram,
    m: usize,
    /// Sparse columns (row, coeff) for every variable incl. slacks and
    /// artificials.
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    n_structural: usize,
    first_artificial: usize,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Row-major dense basis inverse.
    binv: Vec<f64>,
    xb: Vec<f64>,
    /// Scratch buffers.
    y: Vec<f64>,
    d: Vec<f64>,
    row_copy: Vec<f64>,
}

enum StepOutcome {
    Optimal,
    Unbounded,
}

impl<'a> Worker<'a> {
    fn new(cfg: &'a SimplexSolver, lp: &'a LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.n_vars();

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut rhs = vec![0.0; m];
        for (i, c) in lp.constraints.iter().enumerate() {
            rhs[i] = c.rhs;
            for &(j, coeff) in &c.terms {
                cols[j].push((i, coeff));
            }
        }
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for j in 0..n {
            let (lo, hi) = lp.bounds(j);
            assert!(lo.is_finite(), "variable lower bound must be finite");
            assert!(lo <= hi + 1e-15, "inverted bounds on variable {j}");
            lower.push(lo);
            upper.push(hi);
        }

        // Slacks: a.v + s = b for <=, a.v - s = b for >=.
        for (i, c) in lp.constraints.iter().enumerate() {
            let sign = match c.rel {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => continue,
            };
            cols.push(vec![(i, sign)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
        }

        Worker {
            cfg,
            lp,
            m,
            cols,
            lower,
            upper,
            rhs,
            n_structural: n,
            first_artificial: 0,
            state: Vec::new(),
            basis: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            y: vec![0.0; m],
            d: vec![0.0; m],
            row_copy: vec![0.0; m],
        }
    }

    fn run(mut self) -> Result<LpSolution> {
        self.init_basis();

        // Phase 1: maximize -(sum of artificials).
        let has_artificials = self.cols.len() > self.first_artificial;
        if has_artificials {
            let mut cost = vec![0.0; self.cols.len()];
            for j in self.first_artificial..self.cols.len() {
                cost[j] = -1.0;
            }
            match self.optimize(&cost, false)? {
                StepOutcome::Unbounded => {
                    return Err(Error::Solver("phase 1 unbounded".into()));
                }
                _ => {}
            }
            let infeas: f64 = (self.first_artificial..self.cols.len())
                .map(|j| self.var_value(j))
                .sum();
            if infeas > 1e-7 {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    values: vec![0.0; self.n_structural],
                    objective: 0.0,
                });
            }
            self.retire_artificials();
        }

        if std::env::var_os("SSPS_SIMPLEX_DEBUG").is_some() {
            let mut resid = self.rhs.clone();
            for j in 0..self.cols.len() {
                let v = self.var_value(j);
                if v != 0.0 {
                    for &(i, coeff) in &self.cols[j] {
                        resid[i] -= coeff * v;
                    }
                }
            }
            let max_r = resid.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            eprintln!("[simplex {}] after phase 1: residual {max_r:.3e}", self.lp.name);
        }

        // Phase 2: the real objective.
        let mut cost = vec![0.0; self.cols.len()];
        cost[..self.n_structural].copy_from_slice(&self.lp.objective_coeffs()[..self.n_structural]);
        match self.optimize(&cost, true)? {
            StepOutcome::Unbounded => {
                return Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    values: vec![0.0; self.n_structural],
                    objective: f64::INFINITY,
                });
            }
            _ => {}
        }

        if std::env::var_os("SSPS_SIMPLEX_DEBUG").is_some() {
            let mut resid = self.rhs.clone();
            for j in 0..self.cols.len() {
                let v = self.var_value(j);
                if v != 0.0 {
                    for &(i, coeff) in &self.cols[j] {
                        resid[i] -= coeff * v;
                    }
                }
            }
            let max_r = resid.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let art_sum: f64 = (self.first_artificial..self.cols.len()).map(|j| self.var_value(j)).sum();
            eprintln!(
                "[simplex {}] after phase 2: residual {max_r:.3e}, artificial mass {art_sum:.3e}",
                self.lp.name
            );
        }
        self.refine();
        let values: Vec<f64> = (0..self.n_structural)
            .map(|j| {
                let v = self.var_value(j);
                // Snap solver noise onto the box.
                v.max(self.lower[j]).min(self.upper[j])
            })
            .collect();
        let objective: f64 =
            values.iter().zip(self.lp.objective_coeffs()).map(|(v, c)| v * c).sum();

        let violation = self.lp.violation(&values);
        if violation > 1e-7 {
            return Err(Error::Solver(format!(
                "{}: optimal point violates constraints by {violation:.3e}",
                self.lp.name
            )));
        }
        Ok(LpSolution { status: LpStatus::Optimal, values, objective })
    }

    fn var_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic(i) => self.xb[i],
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
        }
    }

    /// Start every non-slack variable at its lower bound, pick slacks or
    /// fresh artificial columns as the initial basis.
    fn init_basis(&mut self) {
        let m = self.m;
        let total = self.cols.len();
        self.state = vec![VarState::AtLower; total];

        // Residual r = b - A v at the all-at-lower-bound point.
        let mut r = self.rhs.clone();
        for j in 0..total {
            let v = self.lower[j];
            if v != 0.0 {
                for &(i, coeff) in &self.cols[j] {
                    r[i] -= coeff * v;
                }
            }
        }

        // Map row -> slack column, if the row has one.
        let mut slack_of_row = vec![usize::MAX; m];
        {
            let mut next = self.n_structural;
            for (i, c) in self.lp.constraints.iter().enumerate() {
                if !matches!(c.rel, Relation::Eq) {
                    slack_of_row[i] = next;
                    next += 1;
                }
            }
        }

        self.first_artificial = total;
        self.basis = vec![usize::MAX; m];
        self.binv = vec![0.0; m * m];
        self.xb = vec![0.0; m];

        for i in 0..m {
            let slack = slack_of_row[i];
            let slack_ok = if slack != usize::MAX {
                let sign = self.cols[slack][0].1;
                let val = r[i] / sign;
                if val >= -self.cfg.feas_tol {
                    self.basis[i] = slack;
                    self.state[slack] = VarState::Basic(i);
                    self.xb[i] = val.max(0.0);
                    self.binv[i * m + i] = 1.0 / sign;
                    true
                } else {
                    false
                }
            } else {
                false
            };
            if !slack_ok {
                let sign = if r[i] >= 0.0 { 1.0 } else { -1.0 };
                let art = self.cols.len();
                self.cols.push(vec![(i, sign)]);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                self.state.push(VarState::Basic(i));
                self.basis[i] = art;
                self.xb[i] = r[i].abs();
                self.binv[i * m + i] = sign;
            }
        }
    }

    /// After phase 1: pivot lingering zero-valued artificials out of the
    /// basis where possible, then freeze all artificial columns.
    fn retire_artificials(&mut self) {
        let m = self.m;
        for i in 0..m {
            let j = self.basis[i];
            if j < self.first_artificial {
                continue;
            }
            // Find any non-artificial nonbasic column with a usable pivot in
            // this row of the tableau.
            let mut replacement = None;
            'search: for q in 0..self.first_artificial {
                match self.state[q] {
                    VarState::Basic(_) => continue,
                    _ => {}
                }
                if self.upper[q] - self.lower[q] <= 0.0 {
                    continue;
                }
                let mut piv = 0.0;
                for &(row, coeff) in &self.cols[q] {
                    piv += self.binv[i * m + row] * coeff;
                }
                if piv.abs() > 1e-7 {
                    replacement = Some((q, piv));
                    break 'search;
                }
            }
            if let Some((q, _)) = replacement {
                self.ftran(q);
                let entering_from = self.state[q];
                let bound_val = match entering_from {
                    VarState::AtUpper => self.upper[q],
                    _ => self.lower[q],
                };
                self.pivot(q, i, bound_val, 0.0, 1.0);
            }
            // Whether or not it was replaced, the artificial must not move
            // again.
            let j = self.basis[i];
            if j >= self.first_artificial {
                self.upper[j] = 0.0;
                self.xb[i] = 0.0;
            }
        }
        // Freeze every nonbasic artificial.
        for j in self.first_artificial..self.cols.len() {
            if !matches!(self.state[j], VarState::Basic(_)) {
                self.upper[j] = 0.0;
                self.state[j] = VarState::AtLower;
            }
        }
    }

    fn optimize(&mut self, cost: &[f64], detect_unbounded: bool) -> Result<StepOutcome> {
        let m = self.m;
        let n_total = self.cols.len();
        let max_iters = self.cfg.max_iter_factor * (m + n_total) + 10_000;
        let mut bland = false;
        let mut degenerate_run = 0usize;
        let mut refreshed = false;

        let debug = std::env::var_os("SSPS_SIMPLEX_DEBUG").is_some();
        for iter in 0..max_iters {
            if iter > 0 && iter % 5000 == 0 {
                self.recompute_xb();
            }
            if debug {
                let mut resid = self.rhs.clone();
                for j in 0..self.cols.len() {
                    let v = self.var_value(j);
                    if v != 0.0 {
                        for &(i, coeff) in &self.cols[j] {
                            resid[i] -= coeff * v;
                        }
                    }
                }
                let max_r = resid.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
                if max_r > 1e-6 {
                    eprintln!("[simplex {}] iter {iter}: tracked-vs-true residual {max_r:.3e}", self.lp.name);
                }
            }
            // BTRAN: y = c_B B^-1.
            self.y.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..m {
                let cb = cost[self.basis[i]];
                if cb != 0.0 {
                    let row = &self.binv[i * m..(i + 1) * m];
                    for (k, &b) in row.iter().enumerate() {
                        if b != 0.0 {
                            self.y[k] += cb * b;
                        }
                    }
                }
            }

            // Pricing.
            let mut entering: Option<(usize, f64, bool)> = None; // (col, reduced, from_upper)
            for j in 0..n_total {
                let from_upper = match self.state[j] {
                    VarState::Basic(_) => continue,
                    VarState::AtLower => false,
                    VarState::AtUpper => true,
                };
                if self.upper[j] - self.lower[j] <= 0.0 {
                    continue; // fixed
                }
                let mut red = cost[j];
                for &(i, coeff) in &self.cols[j] {
                    red -= self.y[i] * coeff;
                }
                let eligible = if from_upper { red < -self.cfg.opt_tol } else { red > self.cfg.opt_tol };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((j, red, from_upper));
                    break;
                }
                match entering {
                    Some((_, best, _)) if red.abs() <= best.abs() => {}
                    _ => entering = Some((j, red, from_upper)),
                }
            }

            let (q, _red, from_upper) = match entering {
                None => return Ok(StepOutcome::Optimal),
                Some(e) => e,
            };
            let dir = if from_upper { -1.0 } else { 1.0 };

            // FTRAN: d = B^-1 A_q.
            self.ftran(q);

            // Harris two-pass ratio test. Pass 1 finds the step limit under a
            // small feasibility relaxation; pass 2 picks, among rows blocking
            // within that limit, the largest pivot element (lowest variable
            // index in Bland mode). Tiny pivots otherwise poison the updated
            // inverse and blow up the reduced costs.
            const RELAX: f64 = 1e-9;
            let flip_len = self.upper[q] - self.lower[q];
            let mut t_limit = flip_len; // may be +inf
            for i in 0..m {
                let di = self.d[i];
                if di.abs() <= self.cfg.pivot_tol {
                    continue;
                }
                let delta = dir * di; // x_B[i] moves by -delta * t
                let room = if delta > 0.0 {
                    self.xb[i] - self.lower[self.basis[i]]
                } else {
                    let hi = self.upper[self.basis[i]];
                    if hi.is_infinite() {
                        continue;
                    }
                    hi - self.xb[i]
                };
                let t_i = (room.max(0.0) + RELAX) / delta.abs();
                if t_i < t_limit {
                    t_limit = t_i;
                }
            }

            let mut leave: Option<usize> = None;
            let mut leave_piv: f64 = 0.0;
            let mut best_t = flip_len;
            if t_limit.is_finite() {
                for i in 0..m {
                    let di = self.d[i];
                    if di.abs() <= self.cfg.pivot_tol {
                        continue;
                    }
                    let delta = dir * di;
                    let room = if delta > 0.0 {
                        self.xb[i] - self.lower[self.basis[i]]
                    } else {
                        let hi = self.upper[self.basis[i]];
                        if hi.is_infinite() {
                            continue;
                        }
                        hi - self.xb[i]
                    };
                    let t_i = room.max(0.0) / delta.abs();
                    if t_i > t_limit {
                        continue;
                    }
                    let take = match leave {
                        None => true,
                        Some(r) => {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                di.abs() > leave_piv.abs()
                            }
                        }
                    };
                    if take {
                        leave = Some(i);
                        leave_piv = di;
                        best_t = t_i;
                    }
                }
                // A row candidate only beats the bound flip if it binds first.
                if flip_len <= best_t {
                    leave = None;
                    best_t = flip_len;
                }
            }

            if debug {
                eprintln!(
                    "[simplex {}] iter {iter}: q={q} from_upper={from_upper} red={_red:.3e} leave={:?} t={best_t:.6e} piv={leave_piv:.3e}",
                    self.lp.name,
                    leave.map(|r| (r, self.basis[r])),
                );
            }
            if leave.is_none() {
                if best_t.is_infinite() {
                    return if detect_unbounded {
                        Ok(StepOutcome::Unbounded)
                    } else {
                        Err(Error::Solver("unexpected unbounded direction".into()))
                    };
                }
                // Bound flip: q runs to its opposite bound, basis unchanged.
                let t = best_t;
                for i in 0..m {
                    let di = self.d[i];
                    if di != 0.0 {
                        self.xb[i] -= dir * di * t;
                    }
                }
                self.state[q] = if from_upper { VarState::AtLower } else { VarState::AtUpper };
                degenerate_run = 0;
                bland = false;
                continue;
            }

            let r = leave.unwrap();

            // Numerical health check: a pivot that is tiny relative to the
            // transformed column signals a degraded inverse. Rebuild it from
            // the basis columns and redo the iteration with fresh numbers.
            let d_norm = self.d.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            if self.d[r].abs() < 1e-8 * (1.0 + d_norm) && !refreshed {
                self.refactor();
                refreshed = true;
                continue;
            }
            refreshed = false;

            let t = best_t.max(0.0);
            if t <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run >= self.cfg.bland_trigger {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }

            let entering_start = if from_upper { self.upper[q] } else { self.lower[q] };
            self.pivot(q, r, entering_start, t, dir);
            debug_assert_eq!(self.basis[r], q);
        }
        Err(Error::Solver(format!("{}: iteration limit exceeded", self.lp.name)))
    }

    /// Rebuild the dense inverse from the basis columns by Gauss-Jordan
    /// elimination with partial pivoting, then restore the basic values.
    fn refactor(&mut self) {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (col_pos, &j) in self.basis.iter().enumerate() {
            for &(row, coeff) in &self.cols[j] {
                a[row * m + col_pos] = coeff;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            // Partial pivot.
            let mut piv_row = col;
            let mut piv_val = a[col * m + col].abs();
            for row in col + 1..m {
                let v = a[row * m + col].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = row;
                }
            }
            if piv_val < 1e-300 {
                // Singular basis should be impossible; keep the old inverse.
                return;
            }
            if piv_row != col {
                for k in 0..m {
                    a.swap(col * m + k, piv_row * m + k);
                    inv.swap(col * m + k, piv_row * m + k);
                }
            }
            let inv_piv = 1.0 / a[col * m + col];
            for k in 0..m {
                a[col * m + k] *= inv_piv;
                inv[col * m + k] *= inv_piv;
            }
            for row in 0..m {
                if row == col {
                    continue;
                }
                let f = a[row * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[row * m + k] -= f * a[col * m + k];
                    inv[row * m + k] -= f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;
        self.recompute_xb();
    }

    /// d = B^-1 A_q using rows of the dense inverse.
    fn ftran(&mut self, q: usize) {
        let m = self.m;
        let col = &self.cols[q];
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for &(r, coeff) in col {
                acc += row[r] * coeff;
            }
            self.d[i] = acc;
        }
    }

    /// Execute the basis change: entering column q replaces the variable in
    /// row r, after the entering variable moved distance `t` from
    /// `entering_start` in direction `dir`. Requires `self.d` from ftran(q).
    fn pivot(&mut self, q: usize, r: usize, entering_start: f64, t: f64, dir: f64) {
        let m = self.m;
        let leaving = self.basis[r];
        // Leaving variable settles at whichever bound it hit.
        let leaving_val = self.xb[r] - dir * self.d[r] * t;
        let lo = self.lower[leaving];
        let hi = self.upper[leaving];
        self.state[leaving] = if (leaving_val - lo).abs() <= (hi - leaving_val).abs() {
            VarState::AtLower
        } else {
            VarState::AtUpper
        };

        for i in 0..m {
            if i != r {
                let di = self.d[i];
                if di != 0.0 {
                    self.xb[i] -= dir * di * t;
                }
            }
        }
        self.xb[r] = entering_start + dir * t;
        self.basis[r] = q;
        self.state[q] = VarState::Basic(r);

        // Rank-1 update of the inverse.
        let pivot = self.d[r];
        let inv_pivot = 1.0 / pivot;
        self.row_copy.copy_from_slice(&self.binv[r * m..(r + 1) * m]);
        for i in 0..m {
            if i == r {
                continue;
            }
            let factor = self.d[i] * inv_pivot;
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.binv[i * m..(i + 1) * m];
            for (k, &rc) in self.row_copy.iter().enumerate() {
                if rc != 0.0 {
                    row[k] -= factor * rc;
                }
            }
        }
        let row = &mut self.binv[r * m..(r + 1) * m];
        for v in row.iter_mut() {
            *v *= inv_pivot;
        }
    }

    /// x_B = B^-1 (b - N v_N), from scratch.
    fn recompute_xb(&mut self) {
        let m = self.m;
        let mut r = self.rhs.clone();
        for j in 0..self.cols.len() {
            let v = match self.state[j] {
                VarState::Basic(_) => continue,
                VarState::AtLower => self.lower[j],
                VarState::AtUpper => self.upper[j],
            };
            if v != 0.0 {
                for &(i, coeff) in &self.cols[j] {
                    r[i] -= coeff * v;
                }
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for (k, &b) in row.iter().enumerate() {
                if b != 0.0 {
                    acc += b * r[k];
                }
            }
            self.xb[i] = acc;
        }
    }

    /// One step of iterative refinement against the original columns,
    /// correcting drift accumulated in the updated inverse.
    fn refine(&mut self) {
        let m = self.m;
        for _ in 0..2 {
            let mut resid = self.rhs.clone();
            for j in 0..self.cols.len() {
                let v = self.var_value(j);
                if v != 0.0 {
                    for &(i, coeff) in &self.cols[j] {
                        resid[i] -= coeff * v;
                    }
                }
            }
            let mut max_r: f64 = 0.0;
            for &v in &resid {
                max_r = max_r.max(v.abs());
            }
            if max_r < 1e-12 {
                return;
            }
            for i in 0..m {
                let row = &self.binv[i * m..(i + 1) * m];
                let mut acc = 0.0;
                for (k, &b) in row.iter().enumerate() {
                    if b != 0.0 {
                        acc += b * resid[k];
                    }
                }
                self.xb[i] += acc;
            }
        }
    }
}
