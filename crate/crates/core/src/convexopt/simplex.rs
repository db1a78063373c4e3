//! Dense two-phase primal simplex for the small linear programs the
//! pipeline needs: polytope compilation (Chebyshev centers, coordinate
//! bounds), exact fiber feasibility, hull membership and gauges.
//!
//! Problems are tiny (tens of variables and rows), so a plain dense tableau
//! with Bland's rule is the robust choice; Bland's rule rules out cycling.

use nalgebra::{DMatrix, DVector};

const EPS: f64 = 1e-9;

/// Outcome of `solve_lp`.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { x: DVector<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Maximize `objective . x` over `{ x : rows_a x <= rows_b }` with free
/// variables. Free variables are split into positive parts internally.
pub fn solve_lp(objective: &DVector<f64>, rows_a: &DMatrix<f64>, rows_b: &DVector<f64>) -> LpOutcome {
    let n = objective.len();
    let m = rows_a.nrows();
    assert_eq!(rows_a.ncols(), n);
    assert_eq!(rows_b.len(), m);

    // Split x = u - v, u, v >= 0, and scale rows to unit max magnitude.
    let ncols = 2 * n;
    let mut a = vec![vec![0.0; ncols]; m];
    let mut b = vec![0.0; m];
    for i in 0..m {
        let mut row_scale: f64 = rows_b[i].abs();
        for j in 0..n {
            row_scale = row_scale.max(rows_a[(i, j)].abs());
        }
        let s = if row_scale > 0.0 { 1.0 / row_scale } else { 1.0 };
        for j in 0..n {
            a[i][j] = rows_a[(i, j)] * s;
            a[i][n + j] = -rows_a[(i, j)] * s;
        }
        b[i] = rows_b[i] * s;
    }
    let mut c = vec![0.0; ncols];
    for j in 0..n {
        c[j] = objective[j];
        c[n + j] = -objective[j];
    }

    match simplex_core(a, b, c) {
        CoreOutcome::Optimal { x, value } => {
            let mut out = DVector::zeros(n);
            for j in 0..n {
                out[j] = x[j] - x[n + j];
            }
            LpOutcome::Optimal { x: out, value }
        }
        CoreOutcome::Infeasible => LpOutcome::Infeasible,
        CoreOutcome::Unbounded => LpOutcome::Unbounded,
    }
}

/// Feasibility of `{ x : rows_a x <= rows_b }`; returns a feasible point.
pub fn feasible_point(rows_a: &DMatrix<f64>, rows_b: &DVector<f64>) -> Option<DVector<f64>> {
    let n = rows_a.ncols();
    match solve_lp(&DVector::zeros(n), rows_a, rows_b) {
        LpOutcome::Optimal { x, .. } => Some(x),
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        LpOutcome::Infeasible => None,
    }
}

enum CoreOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Maximize c.x over { Ax <= b, x >= 0 } via two-phase tableau simplex.
fn simplex_core(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, c: Vec<f64>) -> CoreOutcome {
    let m = a.len();
    let n = if m > 0 { a[0].len() } else { c.len() };

    // Standard form Ax + s = b with b >= 0; rows with negative b are flipped
    // and receive an artificial variable instead of a usable slack basis.
    let mut need_artificial = vec![false; m];
    for i in 0..m {
        if b[i] < 0.0 {
            for j in 0..n {
                a[i][j] = -a[i][j];
            }
            b[i] = -b[i];
            need_artificial[i] = true;
        }
    }

    // Columns: n structural, m slack, then artificials for flipped rows.
    let n_art = need_artificial.iter().filter(|&&f| f).count();
    let total = n + m + n_art;
    let mut t = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0usize; m];
    let mut art_col = n + m;
    for i in 0..m {
        for j in 0..n {
            t[i][j] = a[i][j];
        }
        // Slack: +1 for kept rows, -1 for flipped rows.
        t[i][n + i] = if need_artificial[i] { -1.0 } else { 1.0 };
        t[i][total] = b[i];
        if need_artificial[i] {
            t[i][art_col] = 1.0;
            basis[i] = art_col;
            art_col += 1;
        } else {
            basis[i] = n + i;
        }
    }

    if n_art > 0 {
        // Phase 1: minimize the sum of artificials.
        let mut obj = vec![0.0; total];
        for j in (n + m)..total {
            obj[j] = -1.0;
        }
        match run_simplex(&mut t, &mut basis, &obj, total) {
            RunOutcome::Done(value) => {
                if value < -1e-7 {
                    return CoreOutcome::Infeasible;
                }
            }
            RunOutcome::Unbounded => unreachable!("phase 1 is bounded"),
        }
        // Pivot remaining artificials out of the basis where possible.
        for i in 0..m {
            if basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| t[i][j].abs() > EPS) {
                    pivot(&mut t, &mut basis, i, j, total);
                }
            }
        }
    }

    // Phase 2. Artificial columns are frozen by omitting them from pricing.
    let mut obj = vec![0.0; total];
    obj[..n].copy_from_slice(&c[..n]);
    match run_simplex_limited(&mut t, &mut basis, &obj, total, n + m) {
        RunOutcome::Done(value) => {
            let mut x = vec![0.0; total];
            for i in 0..m {
                x[basis[i]] = t[i][total];
            }
            // A leftover degenerate artificial must carry zero value.
            if x[n + m..].iter().any(|v| v.abs() > 1e-7) {
                return CoreOutcome::Infeasible;
            }
            CoreOutcome::Optimal {
                x: x[..n].to_vec(),
                value,
            }
        }
        RunOutcome::Unbounded => CoreOutcome::Unbounded,
    }
}

enum RunOutcome {
    Done(f64),
    Unbounded,
}

fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], obj: &[f64], total: usize) -> RunOutcome {
    run_simplex_limited(t, basis, obj, total, total)
}

/// Simplex iterations with Bland's rule, pricing only columns `< price_limit`.
fn run_simplex_limited(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    obj: &[f64],
    total: usize,
    price_limit: usize,
) -> RunOutcome {
    let m = t.len();
    loop {
        // Reduced costs for the current basis: r_j = obj_j - y . col_j with
        // y recovered implicitly through the basic objective row.
        let mut reduced = vec![0.0; price_limit];
        for (j, r) in reduced.iter_mut().enumerate() {
            *r = obj[j];
        }
        for i in 0..m {
            let cb = obj[basis[i]];
            if cb != 0.0 {
                for (j, r) in reduced.iter_mut().enumerate() {
                    *r -= cb * t[i][j];
                }
            }
        }
        // Bland: lowest-index improving column (maximization: positive cost).
        let entering = (0..price_limit).find(|&j| {
            reduced[j] > EPS && basis.iter().all(|&bv| bv != j)
        });
        let Some(e) = entering else {
            let mut value = 0.0;
            for i in 0..m {
                value += obj[basis[i]] * t[i][total];
            }
            return RunOutcome::Done(value);
        };
        // Ratio test, lowest basis index on ties (Bland).
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][e] > EPS {
                let ratio = t[i][total] / t[i][e];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS
                            || (ratio < lr + EPS && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((l, _)) = leave else {
            return RunOutcome::Unbounded;
        };
        pivot(t, basis, l, e, total);
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize, total: usize) {
    let m = t.len();
    let p = t[row][col];
    for j in 0..=total {
        t[row][j] /= p;
    }
    for i in 0..m {
        if i != row {
            let f = t[i][col];
            if f != 0.0 {
                for j in 0..=total {
                    t[i][j] -= f * t[row][j];
                }
            }
        }
    }
    basis[row] = col;
}
