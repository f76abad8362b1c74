//! The two quadratic programs behind the bounds.
//!
//! * [`solve_delta`]: `Δ = max_{|δ| ≤ δ̄} −δᵀK⁻¹δ + 2yᵀK⁻¹δ`.
//! * [`solve_svr`]: `min αᵀKα  s.t. |Kα − y| ≤ δ̄`.
//!
//! Substituting `δ = y − Kα` turns the first program into the second, since
//! `Δ(δ) = yᵀK⁻¹y − (y − δ)ᵀK⁻¹(y − δ)`. In terms of the attained values
//! `v = Kα` every coordinate is either free with `α_i = 0`, pinned at
//! `v_i = y_i − δ̄_i` with `α_i ≥ 0`, or pinned at `v_i = y_i + δ̄_i` with
//! `α_i ≤ 0`. Both solvers therefore share
//!
//! * a dual active-set method (Goldfarb–Idnani) in extended precision that
//!   grows the pinned set from `α = 0`, one most-violated constraint at a
//!   time;
//! * an active-set polish that re-solves the equality-constrained KKT system
//!   on the pinned coordinates from scratch and certifies signs and
//!   feasibility.
//!
//! If the active-set method exhausts its step budget, an operator-splitting
//! (ADMM) phase on the residual `r = Kα − y` takes over, whose α-step
//! `(2I + ρK)α = ρ(y + r − u)` runs in `f64`; the Δ solver then falls back to
//! accelerated projected gradient (FISTA with restart) in `δ`. Only certified
//! or first-order-converged points are reported as [`Termination::Converged`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gram::GramFactorization;
use crate::linalg::{CholF64, CholWide, GrowingChol};
use crate::wide::{dot, lift, lower, to_f64, wide, Wide, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    IterationCap,
}

/// Solver settings. `None` selects the per-problem default.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QpOptions {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl QpOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol: Some(tol),
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    /// `δ` for the Δ program, `α` for the SVR program.
    pub point: Vec<f64>,
    /// `Δ` for the Δ program, `αᵀKα` for the SVR program.
    pub objective: f64,
    pub termination: Termination,
    pub iterations: usize,
    /// KKT violation of a certified point, otherwise the first-order
    /// residual of the method at exit.
    pub residual: f64,
    /// `α = K⁻¹(y − δ)`; for SVR identical to `point`.
    pub weights: Vec<f64>,
    /// Attained values `v = Kα`.
    pub values: Vec<f64>,
    pub(crate) exact: Option<Exact>,
}

/// Weights, attained values and objective at working precision.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Exact {
    pub alpha: Vec<Wide>,
    pub values: Vec<Wide>,
    pub objective: Wide,
}

impl QpSolution {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pin {
    Free,
    /// `v_i = y_i − δ̄_i`, equivalently `δ_i = +δ̄_i`
    Lower,
    /// `v_i = y_i + δ̄_i`, equivalently `δ_i = −δ̄_i`
    Upper,
}

struct Polished {
    alpha: Vec<Wide>,
    values: Vec<Wide>,
    violation: f64,
}

/// Box `[y − δ̄, y + δ̄]` for the attained values.
struct ValueBox {
    lo: Vec<Wide>,
    hi: Vec<Wide>,
}

impl ValueBox {
    fn new(y: &[f64], bound: &[f64]) -> Self {
        Self {
            lo: y.iter().zip(bound).map(|(&y, &b)| wide(y) - wide(b)).collect(),
            hi: y.iter().zip(bound).map(|(&y, &b)| wide(y) + wide(b)).collect(),
        }
    }

    fn fixed(&self, i: usize) -> bool {
        self.lo[i] == self.hi[i]
    }
}

fn polish_sweeps(n: usize) -> usize {
    (2 * n + 10).min(60)
}

/// Primal-dual active-set iteration warm-started from `pins`. Returns `None`
/// when the active set does not settle or a reduced system is singular.
fn polish(f: &GramFactorization, bx: &ValueBox, mut pins: Vec<Pin>, max_sweeps: usize) -> Option<Polished> {
    let n = f.len();
    for _ in 0..max_sweeps {
        let active: Vec<usize> = (0..n).filter(|&i| pins[i] != Pin::Free).collect();
        let target = |i: usize| if pins[i] == Pin::Lower { bx.lo[i] } else { bx.hi[i] };
        let mut alpha = vec![ZERO; n];
        if !active.is_empty() {
            let chol = CholWide::new(&f.gram().entries.select(&active)).ok()?;
            let mut rhs: Vec<Wide> = active.iter().map(|&i| target(i)).collect();
            chol.solve_in_place(&mut rhs);
            for (k, &i) in active.iter().enumerate() {
                alpha[i] = rhs[k];
            }
        }
        let mut values: Vec<Wide> = (0..n)
            .map(|i| active.iter().fold(ZERO, |acc, &j| acc + f.gram_wide(i, j) * alpha[j]))
            .collect();
        for &i in &active {
            values[i] = target(i);
        }

        let mut changed = false;
        for i in 0..n {
            if bx.fixed(i) {
                continue;
            }
            let next = match pins[i] {
                Pin::Lower if alpha[i] > ZERO => Pin::Lower,
                Pin::Upper if alpha[i] < ZERO => Pin::Upper,
                Pin::Lower | Pin::Upper => Pin::Free,
                Pin::Free if values[i] < bx.lo[i] => Pin::Lower,
                Pin::Free if values[i] > bx.hi[i] => Pin::Upper,
                Pin::Free => Pin::Free,
            };
            if next != pins[i] {
                changed = true;
                pins[i] = next;
            }
        }
        if !changed {
            let violation = kkt_violation(&alpha, &values, bx);
            return Some(Polished {
                alpha,
                values,
                violation,
            });
        }
    }
    None
}

/// Largest violation of feasibility `lo ≤ v ≤ hi` and of complementary
/// slackness (`α_i > 0` only at `lo`, `α_i < 0` only at `hi`).
fn kkt_violation(alpha: &[Wide], values: &[Wide], bx: &ValueBox) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..alpha.len() {
        let below = to_f64(bx.lo[i] - values[i]).max(0.0);
        let above = to_f64(values[i] - bx.hi[i]).max(0.0);
        worst = worst.max(below).max(above);
        if bx.fixed(i) {
            continue;
        }
        let gap = if alpha[i] > ZERO {
            values[i] - bx.lo[i]
        } else {
            bx.hi[i] - values[i]
        };
        worst = worst.max(to_f64(alpha[i].abs()).min(to_f64(gap.abs())));
    }
    worst
}

fn check_inputs(f: &GramFactorization, y: &[f64], bound: &[f64], strict: bool) -> Result<()> {
    let n = f.len();
    for (what, len) in [("labels", y.len()), ("noise bounds", bound.len())] {
        if len != n {
            return Err(Error::LengthMismatch {
                what,
                expected: n,
                found: len,
            });
        }
    }
    for &b in bound {
        let ok = b.is_finite() && if strict { b > 0.0 } else { b >= 0.0 };
        if !ok {
            return Err(Error::InvalidParameter {
                name: "noise bound",
                reason: alloc::format!(
                    "every entry must be finite and {} 0, got {b}",
                    if strict { ">" } else { "≥" }
                ),
            });
        }
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "label",
            reason: alloc::format!("non-finite value {bad}"),
        });
    }
    Ok(())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

// --- dual active set -------------------------------------------------------

/// Violations below `ACTIVE_SET_FLOOR · (1 + ‖y‖∞)` are treated as satisfied
/// by the active-set method; the polish then certifies the result at the
/// caller's tolerance.
const ACTIVE_SET_FLOOR: f64 = 1e-36;

fn active_set_steps(n: usize) -> usize {
    10 * n + 100
}

/// Goldfarb–Idnani dual method for `min αᵀKα` over the value box.
///
/// Constraint normals are rows of `K`, so for an active set `A` and a
/// candidate `p` the primal step is `e_p − E_A K_AA⁻¹ K_{Ap}` and its
/// curvature is `K_pp − K_{pA} K_AA⁻¹ K_{Ap}`: the squared power function of
/// site `p` against the active sites, positive for distinct sites. Returns the
/// final pins and the number of steps, or `None` when the step budget runs out.
fn dual_active_set(f: &GramFactorization, bx: &ValueBox, floor: Wide, max_steps: usize) -> Option<(Vec<Pin>, usize)> {
    let n = f.len();
    let mut active: Vec<usize> = Vec::new();
    // +1 for a lower pin, −1 for an upper pin
    let mut sign: Vec<Wide> = Vec::new();
    let mut mult: Vec<Wide> = Vec::new();
    let mut in_set = vec![false; n];
    let mut chol = GrowingChol::default();
    let mut values = vec![ZERO; n];
    let mut steps = 0usize;
    loop {
        let mut best: Option<(usize, Wide)> = None;
        for i in (0..n).filter(|&i| !in_set[i]) {
            let below = bx.lo[i] - values[i];
            let above = values[i] - bx.hi[i];
            let v = if below > above { below } else { above };
            if v > floor && best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        let Some((p, _)) = best else { break };
        let lower = bx.lo[p] - values[p] > values[p] - bx.hi[p];
        let (sp, target) = if lower { (ONE, bx.lo[p]) } else { (-ONE, bx.hi[p]) };
        let mut up = ZERO;
        loop {
            steps += 1;
            if steps > max_steps {
                return None;
            }
            let mut l: Vec<Wide> = active.iter().map(|&j| f.gram_wide(j, p)).collect();
            chol.forward(&mut l);
            let curvature = f.gram_wide(p, p) - dot(&l, &l);
            if !(curvature > ZERO) {
                return None;
            }
            let mut c = l.clone();
            chol.backward(&mut c);
            let full = sp * (target - values[p]) / curvature;
            let mut partial: Option<(usize, Wide)> = None;
            for (k, &j) in active.iter().enumerate() {
                if bx.fixed(j) {
                    continue;
                }
                let r = sp * sign[k] * c[k];
                if r > ZERO {
                    let t = mult[k] / r;
                    if partial.map_or(true, |(_, b)| t < b) {
                        partial = Some((k, t));
                    }
                }
            }
            let (t, drop) = match partial {
                Some((k, t1)) if t1 < full => (t1, Some(k)),
                _ => (full, None),
            };
            let ts = t * sp;
            for (i, v) in values.iter_mut().enumerate() {
                let mut kz = f.gram_wide(i, p);
                for (k, &j) in active.iter().enumerate() {
                    kz -= f.gram_wide(i, j) * c[k];
                }
                *v += ts * kz;
            }
            for k in 0..active.len() {
                mult[k] -= ts * sign[k] * c[k];
            }
            up += t;
            match drop {
                None => {
                    chol.push(l, curvature);
                    active.push(p);
                    sign.push(sp);
                    mult.push(up);
                    in_set[p] = true;
                    break;
                }
                Some(k) => {
                    chol.remove(k);
                    in_set[active.remove(k)] = false;
                    sign.remove(k);
                    mult.remove(k);
                }
            }
        }
    }
    let mut pins = vec![Pin::Free; n];
    for (k, &j) in active.iter().enumerate() {
        pins[j] = if sign[k] > ZERO { Pin::Lower } else { Pin::Upper };
    }
    Some((pins, steps))
}

/// Runs the active-set method and certifies its pins by polishing.
fn certified_active_set(f: &GramFactorization, bx: &ValueBox, y: &[f64], tol: f64) -> Option<(Polished, usize)> {
    let floor = wide(ACTIVE_SET_FLOOR * (1.0 + inf_norm(y)));
    let (pins, steps) = dual_active_set(f, bx, floor, active_set_steps(f.len()))?;
    let p = polish(f, bx, pins, polish_sweeps(f.len()))?;
    (p.violation <= tol).then_some((p, steps))
}

// --- splitting -----------------------------------------------------------

struct Splitting {
    polished: Option<Polished>,
    iterations: usize,
    residual: f64,
    alpha: Vec<f64>,
}

/// ADMM on `min αᵀKα + I_box(r)` s.t. `Kα − y = r`, polishing whenever the
/// clipped set of `r` has been stable over two checks.
///
/// `ρ` starts at `trace(K)/N` and is doubled or halved every ten iterations
/// when the primal and dual residuals differ by more than a factor of ten.
fn split(f: &GramFactorization, y: &[f64], bound: &[f64], bx: &ValueBox, tol: f64, max_iter: usize) -> Splitting {
    const CHECK_EVERY: usize = 25;
    let n = f.len();
    let k: Vec<f64> = (0..n * n).map(|idx| to_f64(f.gram_wide(idx / n, idx % n))).collect();
    let kmul = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| k[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    };
    let trace: f64 = (0..n).map(|i| k[i * n + i]).sum();
    let rho0 = trace / n as f64;
    let factor = |rho: f64| CholF64::new(n, |i, j| rho * k[i * n + j] + if i == j { 2.0 } else { 0.0 }).ok();

    let mut out = Splitting {
        polished: None,
        iterations: 0,
        residual: f64::INFINITY,
        alpha: vec![0.0; n],
    };
    let mut rho = rho0;
    let Some(mut m) = factor(rho) else { return out };
    let mut r: Vec<f64> = y.iter().zip(bound).map(|(&y, &b)| (-y).clamp(-b, b)).collect();
    let mut u = vec![0.0; n];
    let mut previous: Option<Vec<Pin>> = None;
    let mut tried: Option<Vec<Pin>> = None;

    for it in 1..=max_iter {
        out.iterations = it;
        let mut rhs: Vec<f64> = (0..n).map(|i| rho * (y[i] + r[i] - u[i])).collect();
        m.solve_in_place(&mut rhs);
        out.alpha = rhs;
        let ka = kmul(&out.alpha);
        let r_old = r.clone();
        let mut primal = 0.0f64;
        for i in 0..n {
            r[i] = (ka[i] - y[i] + u[i]).clamp(-bound[i], bound[i]);
            let res = ka[i] - y[i] - r[i];
            u[i] += res;
            primal = primal.max(res.abs());
        }
        let dr: Vec<f64> = r.iter().zip(&r_old).map(|(a, b)| a - b).collect();
        let dual = rho * inf_norm(&kmul(&dr));
        out.residual = primal.max(dual);

        let small = primal < tol && dual < tol;
        if small || it % CHECK_EVERY == 0 {
            let pins: Vec<Pin> = (0..n)
                .map(|i| {
                    if r[i] <= -bound[i] {
                        Pin::Lower
                    } else if r[i] >= bound[i] {
                        Pin::Upper
                    } else {
                        Pin::Free
                    }
                })
                .collect();
            let stable = previous.as_ref() == Some(&pins);
            if (small || stable) && tried.as_ref() != Some(&pins) {
                if let Some(p) = polish(f, bx, pins.clone(), polish_sweeps(n)) {
                    if p.violation <= tol {
                        out.polished = Some(p);
                        return out;
                    }
                }
                tried = Some(pins.clone());
            }
            previous = Some(pins);
        }

        if it % 10 == 0 {
            let next = if primal > 10.0 * dual && rho < 1e6 * rho0 {
                rho * 2.0
            } else if dual > 10.0 * primal && rho > 1e-6 * rho0 {
                rho / 2.0
            } else {
                rho
            };
            if next != rho {
                let Some(nm) = factor(next) else { return out };
                u.iter_mut().for_each(|v| *v *= rho / next);
                rho = next;
                m = nm;
            }
        }
    }
    out
}

// --- Δ -----------------------------------------------------------------

struct DeltaProblem<'a> {
    f: &'a GramFactorization,
    y: Vec<Wide>,
    /// `yᵀK⁻¹y`
    y_quad: Wide,
    bound: &'a [f64],
}

impl DeltaProblem<'_> {
    /// `∇g(δ) = 2K⁻¹(δ − y)` for the minimized `g = −Δ`.
    fn gradient(&self, delta: &[f64]) -> Vec<f64> {
        let r: Vec<Wide> = delta.iter().zip(&self.y).map(|(&d, &y)| wide(d) - y).collect();
        self.f.solve_wide(r).into_iter().map(|v| 2.0 * to_f64(v)).collect()
    }

    fn project(&self, x: &mut [f64]) {
        for (v, &b) in x.iter_mut().zip(self.bound) {
            *v = v.clamp(-b, b);
        }
    }

    fn pins(&self, delta: &[f64]) -> Vec<Pin> {
        delta
            .iter()
            .zip(self.bound)
            .map(|(&d, &b)| {
                if d >= b {
                    Pin::Lower
                } else if d <= -b {
                    Pin::Upper
                } else {
                    Pin::Free
                }
            })
            .collect()
    }

    /// Norm of the projected gradient of `g`.
    fn projected_gradient(&self, delta: &[f64], grad: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..delta.len() {
            let b = self.bound[i];
            let g = grad[i];
            let c = if b == 0.0 {
                0.0
            } else if delta[i] >= b {
                g.min(0.0)
            } else if delta[i] <= -b {
                g.max(0.0)
            } else {
                g
            };
            s += c * c;
        }
        libm::sqrt(s)
    }

    /// Upper estimate of the largest eigenvalue of `2K⁻¹`.
    fn lipschitz(&self) -> f64 {
        let n = self.y.len();
        let mut v: Vec<Wide> = (0..n).map(|i| wide(1.0 + (i % 7) as f64 * 0.1)).collect();
        let mut lambda = 0.0;
        for _ in 0..50 {
            let norm = libm::sqrt(to_f64(dot(&v, &v)));
            for x in v.iter_mut() {
                *x /= wide(norm);
            }
            let w = self.f.solve_wide(v.clone());
            lambda = to_f64(dot(&v, &w));
            v = w;
        }
        // power iteration approaches from below
        2.0 * lambda * 1.1
    }

    /// `Δ = yᵀK⁻¹y − vᵀK⁻¹v` for attained values `v = y − δ`; both quadratic
    /// forms come from forward substitution only.
    fn objective(&self, values: &[Wide]) -> Wide {
        self.y_quad - self.f.inv_quad_wide(values)
    }

    fn solution(
        &self,
        alpha: Vec<Wide>,
        values: Vec<Wide>,
        iterations: usize,
        residual: f64,
        termination: Termination,
    ) -> QpSolution {
        let mut objective = self.objective(&values);
        // δ = 0 is feasible, so Δ ≥ 0 up to roundoff
        if objective < ZERO {
            objective = ZERO;
        }
        let mut point: Vec<f64> = self.y.iter().zip(&values).map(|(&y, &v)| to_f64(y - v)).collect();
        self.project(&mut point);
        QpSolution {
            point,
            objective: to_f64(objective),
            termination,
            iterations,
            residual,
            weights: lower(&alpha),
            values: lower(&values),
            exact: Some(Exact {
                alpha,
                values,
                objective,
            }),
        }
    }

    fn from_polished(&self, p: Polished, iterations: usize) -> QpSolution {
        self.solution(p.alpha, p.values, iterations, p.violation, Termination::Converged)
    }

    fn from_delta(&self, delta: &[f64], iterations: usize, residual: f64, termination: Termination) -> QpSolution {
        let values: Vec<Wide> = self.y.iter().zip(delta).map(|(&y, &d)| y - wide(d)).collect();
        let alpha = self.f.solve_wide(values.clone());
        self.solution(alpha, values, iterations, residual, termination)
    }
}

/// Boxed maximization defining `Δ`.
///
/// The default tolerance is `1e−10 · (1 + ‖y‖₂)`, applied to the KKT
/// violation of a polished point and to the projected-gradient norm of the
/// fallback; the default iteration cap is `200 · N` per phase. An
/// [`Termination::IterationCap`] result is not a valid `Δ` for a bound.
pub fn solve_delta(f: &GramFactorization, y: &[f64], bound: &[f64], opts: QpOptions) -> Result<QpSolution> {
    check_inputs(f, y, bound, false)?;
    let n = f.len();
    let y_norm = libm::sqrt(y.iter().map(|v| v * v).sum::<f64>());
    let tol = opts.tol.unwrap_or(1e-10 * (1.0 + y_norm));
    let max_iter = opts.max_iter.unwrap_or(200 * n);
    let yd = lift(y);
    let problem = DeltaProblem {
        f,
        y_quad: f.inv_quad_wide(&yd),
        y: yd,
        bound,
    };
    let bx = ValueBox::new(y, bound);

    if bound.iter().all(|&b| b == 0.0) {
        return Ok(problem.from_delta(&vec![0.0; n], 0, 0.0, Termination::Converged));
    }

    if let Some((p, steps)) = certified_active_set(f, &bx, y, tol) {
        return Ok(problem.from_polished(p, steps));
    }

    // the unconstrained maximizer δ = y, clipped to the box
    let mut x: Vec<f64> = y.to_vec();
    problem.project(&mut x);
    let mut last_pins = problem.pins(&x);
    let s = split(f, y, bound, &bx, tol, max_iter);
    if let Some(p) = s.polished {
        return Ok(problem.from_polished(p, s.iterations));
    }
    let spent = s.iterations;

    let step = 1.0 / problem.lipschitz();
    let mut x_prev = x.clone();
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut stable = 0usize;
    let mut tried = last_pins.clone();
    let mut pg = f64::INFINITY;
    for it in 1..=max_iter {
        let g = problem.gradient(&z);
        let mut next: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - step * gi).collect();
        problem.project(&mut next);

        // gradient-mapping restart keeps the momentum monotone
        let restart = z
            .iter()
            .zip(&next)
            .zip(&x)
            .map(|((zi, ni), xi)| (zi - ni) * (ni - xi))
            .sum::<f64>()
            > 0.0;
        let t_next = if restart {
            1.0
        } else {
            0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t))
        };
        let beta = if restart { 0.0 } else { (t - 1.0) / t_next };
        x_prev.clone_from(&x);
        x = next;
        t = t_next;
        z = x.iter().zip(&x_prev).map(|(a, b)| a + beta * (a - b)).collect();

        if it % 10 != 0 && it != max_iter {
            continue;
        }
        pg = problem.projected_gradient(&x, &problem.gradient(&x));
        let pins = problem.pins(&x);
        if pg < tol {
            if let Some(p) = polish(f, &bx, pins, polish_sweeps(n)).filter(|p| p.violation <= tol) {
                return Ok(problem.from_polished(p, spent + it));
            }
            return Ok(problem.from_delta(&x, spent + it, pg, Termination::Converged));
        }
        if pins == last_pins {
            stable += 1;
        } else {
            stable = 0;
            last_pins = pins;
        }
        if stable >= 2 && last_pins != tried {
            tried = last_pins.clone();
            if let Some(p) = polish(f, &bx, last_pins.clone(), polish_sweeps(n)).filter(|p| p.violation <= tol) {
                return Ok(problem.from_polished(p, spent + it));
            }
        }
    }
    Ok(problem.from_delta(&x, spent + max_iter, pg, Termination::IterationCap))
}

// --- SVR ---------------------------------------------------------------

/// Minimum-norm weights whose attained values stay within the noise bounds.
///
/// Requires `δ̄ > 0`. The default tolerance on the KKT violation is
/// `1e−9 · (1 + ‖y‖∞)` and the default iteration cap `max(20000, 100·N)`.
pub fn solve_svr(f: &GramFactorization, y: &[f64], bound: &[f64], opts: QpOptions) -> Result<QpSolution> {
    check_inputs(f, y, bound, true)?;
    let n = f.len();
    let tol = opts.tol.unwrap_or(1e-9) * (1.0 + inf_norm(y));
    let max_iter = opts.max_iter.unwrap_or(20_000.max(100 * n));
    let bx = ValueBox::new(y, bound);

    let certified = |p: Polished, iterations: usize| {
        let objective = f.inv_quad_wide(&p.values);
        let alpha = lower(&p.alpha);
        QpSolution {
            point: alpha.clone(),
            objective: to_f64(objective),
            termination: Termination::Converged,
            iterations,
            residual: p.violation,
            weights: alpha,
            values: lower(&p.values),
            exact: Some(Exact {
                alpha: p.alpha,
                values: p.values,
                objective,
            }),
        }
    };

    if let Some((p, steps)) = certified_active_set(f, &bx, y, tol) {
        return Ok(certified(p, steps));
    }

    let s = split(f, y, bound, &bx, tol, max_iter);
    if let Some(p) = s.polished {
        return Ok(certified(p, s.iterations));
    }
    let values: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| to_f64(f.gram_wide(i, j)) * s.alpha[j]).sum())
        .collect();
    let objective = s.alpha.iter().zip(&values).map(|(a, b)| a * b).sum();
    Ok(QpSolution {
        point: s.alpha.clone(),
        objective,
        termination: Termination::IterationCap,
        iterations: s.iterations,
        residual: s.residual,
        weights: s.alpha,
        values,
        exact: None,
    })
}
