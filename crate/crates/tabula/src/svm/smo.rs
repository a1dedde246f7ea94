//! Sequential minimal optimization for the soft-margin dual.
//!
//! Working pairs: the first multiplier violating its KKT condition by
//! more than `tol`, paired with the index maximizing |E₁ − E₂| over a
//! cached error vector (falling back to an ascending scan when that pair
//! cannot move). Each pairwise step solves the two-variable subproblem
//! exactly, so the dual objective never decreases. Termination requires
//! `max_passes` consecutive sweeps without progress *and* a clean KKT
//! verification — recomputed from scratch, not from the cache — against
//! the final bias, which is the average over non-bound support vectors.

use super::{Kernel, SvmError};

const SWEEP_BUDGET: usize = 20_000;
const ALPHA_EPS: f64 = 1e-12;

pub(crate) struct SmoSolution {
    pub alphas: Vec<f64>,
    pub b: f64,
    pub dual_trace: Vec<f64>,
    pub sweeps: usize,
}

struct Workspace<'a> {
    y: &'a [f64],
    c: f64,
    tol: f64,
    gram: Vec<Vec<f64>>,
    alphas: Vec<f64>,
    b: f64,
    /// cached prediction errors E_i = f(x_i) − y_i, updated after every
    /// successful step
    errors: Vec<f64>,
}

impl Workspace<'_> {
    /// f(x_i) recomputed from the multipliers (used for verification).
    fn decision_exact(&self, i: usize) -> f64 {
        let mut sum = self.b;
        for (j, &a) in self.alphas.iter().enumerate() {
            if a > 0.0 {
                sum += a * self.y[j] * self.gram[j][i];
            }
        }
        sum
    }

    fn violates_kkt_cached(&self, i: usize) -> bool {
        let r = self.y[i] * (self.errors[i] + self.y[i]) - 1.0;
        (r < -self.tol && self.alphas[i] < self.c - ALPHA_EPS)
            || (r > self.tol && self.alphas[i] > ALPHA_EPS)
    }

    fn violates_kkt_exact(&self, i: usize, b: f64) -> bool {
        let g = self.decision_exact(i) - self.b + b;
        let r = self.y[i] * g - 1.0;
        (r < -self.tol && self.alphas[i] < self.c - ALPHA_EPS)
            || (r > self.tol && self.alphas[i] > ALPHA_EPS)
    }

    /// Joint optimization of the pair (i, j). Returns whether any
    /// multiplier moved.
    fn step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ai_old, aj_old) = (self.alphas[i], self.alphas[j]);
        let e_i = self.errors[i];
        let e_j = self.errors[j];

        let (lo, hi) = if yi != yj {
            (
                f64::max(0.0, aj_old - ai_old),
                f64::min(self.c, self.c + aj_old - ai_old),
            )
        } else {
            (
                f64::max(0.0, ai_old + aj_old - self.c),
                f64::min(self.c, ai_old + aj_old),
            )
        };
        if hi - lo < ALPHA_EPS {
            return false;
        }
        // second derivative of the objective along the constraint line
        let eta = self.gram[i][i] + self.gram[j][j] - 2.0 * self.gram[i][j];
        if eta <= 0.0 {
            return false;
        }
        let aj_new = (aj_old + yj * (e_i - e_j) / eta).clamp(lo, hi);
        if (aj_new - aj_old).abs() < ALPHA_EPS {
            return false;
        }
        // exact arithmetic keeps α within the box; clamp away rounding
        let ai_new = (ai_old + yi * yj * (aj_old - aj_new)).clamp(0.0, self.c);
        self.alphas[i] = ai_new;
        self.alphas[j] = aj_new;

        let b1 = self.b
            - e_i
            - yi * (ai_new - ai_old) * self.gram[i][i]
            - yj * (aj_new - aj_old) * self.gram[i][j];
        let b2 = self.b
            - e_j
            - yi * (ai_new - ai_old) * self.gram[i][j]
            - yj * (aj_new - aj_old) * self.gram[j][j];
        let b_new = if ai_new > ALPHA_EPS && ai_new < self.c - ALPHA_EPS {
            b1
        } else if aj_new > ALPHA_EPS && aj_new < self.c - ALPHA_EPS {
            b2
        } else {
            (b1 + b2) / 2.0
        };

        let delta_b = b_new - self.b;
        let (dai, daj) = (ai_new - ai_old, aj_new - aj_old);
        for k in 0..self.errors.len() {
            self.errors[k] +=
                yi * dai * self.gram[i][k] + yj * daj * self.gram[j][k] + delta_b;
        }
        self.b = b_new;
        true
    }

    /// Refresh the error cache from scratch (after bias resets).
    fn rebuild_errors(&mut self) {
        for i in 0..self.errors.len() {
            self.errors[i] = self.decision_exact(i) - self.y[i];
        }
    }

    fn dual_objective(&self) -> f64 {
        let n = self.alphas.len();
        let mut obj: f64 = self.alphas.iter().sum();
        for i in 0..n {
            if self.alphas[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if self.alphas[j] == 0.0 {
                    continue;
                }
                obj -= 0.5
                    * self.alphas[i]
                    * self.alphas[j]
                    * self.y[i]
                    * self.y[j]
                    * self.gram[i][j];
            }
        }
        obj
    }

    /// Average of `yᵢ − Σ αⱼyⱼK(xⱼ, xᵢ)` over non-bound support vectors;
    /// falls back to the running bias when every multiplier is at a
    /// bound.
    fn averaged_bias(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (i, &a) in self.alphas.iter().enumerate() {
            if a > ALPHA_EPS && a < self.c - ALPHA_EPS {
                sum += self.y[i] - (self.decision_exact(i) - self.b);
                count += 1;
            }
        }
        if count > 0 {
            sum / count as f64
        } else {
            self.b
        }
    }
}

pub(crate) fn solve(
    rows: &[Vec<f64>],
    y: &[f64],
    c: f64,
    kernel: &Kernel,
    tol: f64,
    max_passes: usize,
) -> Result<SmoSolution, SvmError> {
    let n = rows.len();
    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let k = kernel.eval(&rows[i], &rows[j])?;
            gram[i][j] = k;
            gram[j][i] = k;
        }
    }
    let mut ws = Workspace {
        y,
        c,
        tol,
        gram,
        alphas: vec![0.0; n],
        b: 0.0,
        errors: y.iter().map(|yi| -yi).collect(),
    };
    let mut dual_trace = Vec::new();
    let mut sweeps = 0usize;

    loop {
        let mut quiet_passes = 0usize;
        while quiet_passes < max_passes {
            if sweeps >= SWEEP_BUDGET {
                return Err(SvmError::NoConvergence { sweeps });
            }
            sweeps += 1;
            let mut changed = 0usize;
            for i in 0..n {
                if !ws.violates_kkt_cached(i) {
                    continue;
                }
                let e_i = ws.errors[i];
                let partner = (0..n)
                    .filter(|&j| j != i)
                    .max_by(|&a, &b| {
                        (e_i - ws.errors[a])
                            .abs()
                            .total_cmp(&(e_i - ws.errors[b]).abs())
                            .then(b.cmp(&a))
                    });
                let moved = match partner {
                    Some(j) if ws.step(i, j) => true,
                    _ => (0..n).any(|j| ws.step(i, j)),
                };
                if moved {
                    changed += 1;
                }
            }
            dual_trace.push(ws.dual_objective());
            if changed == 0 {
                quiet_passes += 1;
            } else {
                quiet_passes = 0;
            }
        }
        // verify against the final averaged bias using exact decisions;
        // resume if it exposes a violation the running bias hid
        let b_final = ws.averaged_bias();
        let clean = (0..n).all(|i| !ws.violates_kkt_exact(i, b_final));
        if clean {
            return Ok(SmoSolution {
                alphas: ws.alphas,
                b: b_final,
                dual_trace,
                sweeps,
            });
        }
        ws.b = b_final;
        ws.rebuild_errors();
        if sweeps >= SWEEP_BUDGET {
            return Err(SvmError::NoConvergence { sweeps });
        }
    }
}

/// Largest KKT violation of `(alphas, b)` for the given problem: the
/// amount by which some row breaks its margin condition. Converged
/// solutions satisfy `violation <= tol`.
pub fn kkt_max_violation(
    rows: &[Vec<f64>],
    y: &[f64],
    alphas: &[f64],
    b: f64,
    c: f64,
    kernel: &Kernel,
) -> Result<f64, SvmError> {
    let n = rows.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut g = b;
        for j in 0..n {
            if alphas[j] > 0.0 {
                g += alphas[j] * y[j] * kernel.eval(&rows[j], &rows[i])?;
            }
        }
        let r = y[i] * g - 1.0;
        let violation = if alphas[i] <= ALPHA_EPS {
            (-r).max(0.0) // needs y·f ≥ 1
        } else if alphas[i] >= c - ALPHA_EPS {
            r.max(0.0) // needs y·f ≤ 1
        } else {
            r.abs() // needs y·f = 1
        };
        worst = worst.max(violation);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_objective_monotone_on_small_problem() {
        let rows = vec![
            vec![0.0, 0.3],
            vec![0.4, 0.1],
            vec![2.3, 2.0],
            vec![2.0, 2.6],
            vec![0.2, 0.9],
            vec![2.8, 1.7],
        ];
        let y = vec![-1.0, -1.0, 1.0, 1.0, -1.0, 1.0];
        let s = solve(&rows, &y, 5.0, &Kernel::Linear, 1e-3, 5).unwrap();
        for w in s.dual_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "dual decreased: {} -> {}", w[0], w[1]);
        }
        let worst =
            kkt_max_violation(&rows, &y, &s.alphas, s.b, 5.0, &Kernel::Linear).unwrap();
        assert!(worst <= 1e-3 + 1e-9, "kkt violation {worst}");
    }

    #[test]
    fn alpha_constraint_preserved() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![-1.0, -1.0, 1.0, 1.0];
        let s = solve(&rows, &y, 2.0, &Kernel::Linear, 1e-3, 5).unwrap();
        let sum: f64 = s.alphas.iter().zip(&y).map(|(a, yi)| a * yi).sum();
        assert!(sum.abs() <= 1e-6);
    }

    #[test]
    fn error_cache_stays_consistent() {
        let rows: Vec<Vec<f64>> = (0..14)
            .map(|i| vec![(i % 7) as f64, (i / 7) as f64 * 3.0])
            .collect();
        let y: Vec<f64> = (0..14).map(|i| if i < 7 { -1.0 } else { 1.0 }).collect();
        let s = solve(&rows, &y, 3.0, &Kernel::Rbf { sigma: 1.5 }, 1e-3, 5).unwrap();
        // the returned solution satisfies KKT when recomputed exactly
        let worst = kkt_max_violation(&rows, &y, &s.alphas, s.b, 3.0, &Kernel::Rbf {
            sigma: 1.5,
        })
        .unwrap();
        assert!(worst <= 1e-3 + 1e-9, "kkt violation {worst}");
    }
}
