//! Global time integrators: the three-stage forward-backward Runge-Kutta
//! scheme FB-RK(3,2) with configurable averaging weights, and classical RK4
//! as the reference baseline.
//!
//! The stage arithmetic is factored into small helpers (`advance`, `fb_avg2`,
//! `fb_avg3`, `stage_update_span`, ...) shared with the local time-stepping
//! engine, so a multirate step with M = 1 runs the exact same floating-point
//! expressions as a global step.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mesh::Mesh;
use crate::operators::{
    momentum_fast_span, momentum_slow_span, thickness_tendency_span, PhysicsConfig, Span, State,
    WorkCounters,
};
use crate::Result;

/// Forward-backward averaging weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbWeights {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

impl Default for FbWeights {
    /// The CFL-optimized triple.
    fn default() -> Self {
        FbWeights {
            beta1: 0.531,
            beta2: 0.531,
            beta3: 0.313,
        }
    }
}

impl FbWeights {
    /// All-zero weights recover the underlying RK(3,2) scheme.
    pub fn zero() -> Self {
        FbWeights {
            beta1: 0.0,
            beta2: 0.0,
            beta3: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, b) in [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
        ] {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::Config(format!(
                    "forward-backward weight {name} = {b} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Per-step context: the step size, averaging weights, physics, and the
/// shared work counters.
#[derive(Debug, Clone)]
pub struct StepContext {
    pub dt: f64,
    pub weights: FbWeights,
    pub physics: PhysicsConfig,
    pub counters: WorkCounters,
}

impl StepContext {
    pub fn new(dt: f64, weights: FbWeights, physics: PhysicsConfig) -> StepContext {
        StepContext {
            dt,
            weights,
            physics,
            counters: WorkCounters::default(),
        }
    }
}

/// Momentum source selection: evaluate the slow terms at stage data, or add
/// a slow tendency frozen at the start of the coarse step.
#[derive(Clone, Copy)]
pub enum RhsMode<'a> {
    Unsplit,
    Split(&'a [f64]),
}

/// Right-hand-side provider for the stage machinery. The solver implements
/// this on the shallow-water operators; tests implement it on surrogate
/// systems (constant forcing, oscillators, scalar decay).
pub trait StageRhs {
    fn thickness(&mut self, u: &[f64], h: &[f64], out: &mut [f64], cells: Span<'_>);
    fn momentum(&mut self, u: &[f64], h: &[f64], out: &mut [f64], edges: Span<'_>) -> Result<()>;
    /// Whether stage thickness values must stay positive.
    fn guard_positivity(&self) -> bool {
        true
    }
}

/// The shallow-water right-hand side with work counting.
pub struct SweRhs<'a> {
    pub mesh: &'a Mesh,
    pub cfg: &'a PhysicsConfig,
    pub mode: RhsMode<'a>,
    pub counters: &'a mut WorkCounters,
}

impl StageRhs for SweRhs<'_> {
    fn thickness(&mut self, u: &[f64], h: &[f64], out: &mut [f64], cells: Span<'_>) {
        thickness_tendency_span(self.mesh, u, h, out, cells, self.counters);
    }

    fn momentum(&mut self, u: &[f64], h: &[f64], out: &mut [f64], edges: Span<'_>) -> Result<()> {
        momentum_fast_span(self.mesh, self.cfg, h, out, edges, self.counters);
        match self.mode {
            RhsMode::Unsplit => {
                let mut slow = vec![0.0; out.len()];
                momentum_slow_span(self.mesh, self.cfg, u, h, &mut slow, edges, self.counters)?;
                for e in edges.iter(self.mesh.n_edges) {
                    out[e] += slow[e];
                }
            }
            RhsMode::Split(frozen) => {
                for e in edges.iter(self.mesh.n_edges) {
                    out[e] += frozen[e];
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Stage arithmetic, pinned expression order.
// ---------------------------------------------------------------------------

#[inline]
pub fn advance(base: f64, coef: f64, tend: f64) -> f64 {
    base + coef * tend
}

/// Two-level forward-backward average: beta*newest + (1-beta)*old.
#[inline]
pub fn fb_avg2(beta: f64, newest: f64, old: f64) -> f64 {
    beta * newest + (1.0 - beta) * old
}

/// Three-level forward-backward average used by the final stage.
#[inline]
pub fn fb_avg3(beta3: f64, newest: f64, mid: f64, old: f64) -> f64 {
    beta3 * newest + (1.0 - 2.0 * beta3) * mid + beta3 * old
}

pub(crate) fn stage_update_span(
    base: &[f64],
    coef: f64,
    tend: &[f64],
    out: &mut [f64],
    span: Span<'_>,
    n: usize,
) {
    for i in span.iter(n) {
        out[i] = advance(base[i], coef, tend[i]);
    }
}

pub(crate) fn fb_avg2_span(
    beta: f64,
    newest: &[f64],
    old: &[f64],
    out: &mut [f64],
    span: Span<'_>,
    n: usize,
) {
    for i in span.iter(n) {
        out[i] = fb_avg2(beta, newest[i], old[i]);
    }
}

pub(crate) fn fb_avg3_span(
    beta3: f64,
    newest: &[f64],
    mid: &[f64],
    old: &[f64],
    out: &mut [f64],
    span: Span<'_>,
    n: usize,
) {
    for i in span.iter(n) {
        out[i] = fb_avg3(beta3, newest[i], mid[i], old[i]);
    }
}

pub(crate) fn check_positive_span(
    h: &[f64],
    span: Span<'_>,
    n: usize,
    context: &str,
) -> Result<()> {
    for i in span.iter(n) {
        if !(h[i] > 0.0) {
            return Err(Error::NonPositiveThickness {
                cell: i,
                value: h[i],
                context: context.to_string(),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// FB-RK(3,2)
// ---------------------------------------------------------------------------

/// All retained stage data from one FB-RK(3,2) step.
#[derive(Debug, Clone)]
pub struct Fbrk32Stages {
    pub h_bar1: Vec<f64>,
    pub h_star1: Vec<f64>,
    pub u_bar1: Vec<f64>,
    pub h_bar2: Vec<f64>,
    pub h_star2: Vec<f64>,
    pub u_bar2: Vec<f64>,
    pub h_new: Vec<f64>,
    pub h_star3: Vec<f64>,
    pub u_new: Vec<f64>,
}

/// One FB-RK(3,2) step over plain field arrays, returning every stage buffer.
pub fn fbrk32_step_fields(
    h: &[f64],
    u: &[f64],
    dt: f64,
    w: FbWeights,
    rhs: &mut impl StageRhs,
) -> Result<Fbrk32Stages> {
    let nc = h.len();
    let ne = u.len();
    let all_c = Span::All;
    let all_e = Span::All;
    let guard = rhs.guard_positivity();

    let mut dh = vec![0.0; nc];
    let mut du = vec![0.0; ne];

    // Stage 1 at dt/3.
    let mut h_bar1 = vec![0.0; nc];
    rhs.thickness(u, h, &mut dh, all_c);
    stage_update_span(h, dt / 3.0, &dh, &mut h_bar1, all_c, nc);
    if guard {
        check_positive_span(&h_bar1, all_c, nc, "FB-RK(3,2) stage 1")?;
    }
    let mut h_star1 = vec![0.0; nc];
    fb_avg2_span(w.beta1, &h_bar1, h, &mut h_star1, all_c, nc);
    let mut u_bar1 = vec![0.0; ne];
    rhs.momentum(u, &h_star1, &mut du, all_e)?;
    stage_update_span(u, dt / 3.0, &du, &mut u_bar1, all_e, ne);

    // Stage 2 at dt/2.
    let mut h_bar2 = vec![0.0; nc];
    rhs.thickness(&u_bar1, &h_bar1, &mut dh, all_c);
    stage_update_span(h, dt / 2.0, &dh, &mut h_bar2, all_c, nc);
    if guard {
        check_positive_span(&h_bar2, all_c, nc, "FB-RK(3,2) stage 2")?;
    }
    let mut h_star2 = vec![0.0; nc];
    fb_avg2_span(w.beta2, &h_bar2, h, &mut h_star2, all_c, nc);
    let mut u_bar2 = vec![0.0; ne];
    rhs.momentum(&u_bar1, &h_star2, &mut du, all_e)?;
    stage_update_span(u, dt / 2.0, &du, &mut u_bar2, all_e, ne);

    // Stage 3 at dt.
    let mut h_new = vec![0.0; nc];
    rhs.thickness(&u_bar2, &h_bar2, &mut dh, all_c);
    stage_update_span(h, dt, &dh, &mut h_new, all_c, nc);
    if guard {
        check_positive_span(&h_new, all_c, nc, "FB-RK(3,2) stage 3")?;
    }
    let mut h_star3 = vec![0.0; nc];
    fb_avg3_span(w.beta3, &h_new, &h_bar2, h, &mut h_star3, all_c, nc);
    let mut u_new = vec![0.0; ne];
    rhs.momentum(&u_bar2, &h_star3, &mut du, all_e)?;
    stage_update_span(u, dt, &du, &mut u_new, all_e, ne);

    Ok(Fbrk32Stages {
        h_bar1,
        h_star1,
        u_bar1,
        h_bar2,
        h_star2,
        u_bar2,
        h_new,
        h_star3,
        u_new,
    })
}

/// One global FB-RK(3,2) step of the shallow-water system.
pub fn fbrk32_step(
    mesh: &Mesh,
    state: &State,
    ctx: &mut StepContext,
    mode: RhsMode<'_>,
) -> Result<State> {
    let stages = fbrk32_step_stages(mesh, state, ctx, mode)?;
    Ok(State {
        h: stages.h_new,
        u: stages.u_new,
        t: state.t + ctx.dt,
    })
}

/// Like [`fbrk32_step`], but hands back the full stage record.
pub fn fbrk32_step_stages(
    mesh: &Mesh,
    state: &State,
    ctx: &mut StepContext,
    mode: RhsMode<'_>,
) -> Result<Fbrk32Stages> {
    let cfg = ctx.physics;
    let mut rhs = SweRhs {
        mesh,
        cfg: &cfg,
        mode,
        counters: &mut ctx.counters,
    };
    fbrk32_step_fields(&state.h, &state.u, ctx.dt, ctx.weights, &mut rhs)
}

// ---------------------------------------------------------------------------
// RK4
// ---------------------------------------------------------------------------

/// One classical four-stage Runge-Kutta step over plain field arrays.
pub fn rk4_step_fields(
    h: &[f64],
    u: &[f64],
    dt: f64,
    rhs: &mut impl StageRhs,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nc = h.len();
    let ne = u.len();
    let guard = rhs.guard_positivity();

    let eval = |rhs: &mut dyn StageRhs, uu: &[f64], hh: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut dh = vec![0.0; nc];
        let mut du = vec![0.0; ne];
        rhs.thickness(uu, hh, &mut dh, Span::All);
        rhs.momentum(uu, hh, &mut du, Span::All)?;
        Ok((dh, du))
    };
    let probe = |h: &[f64], u: &[f64], coef: f64, dh: &[f64], du: &[f64]| {
        let hh: Vec<f64> = h.iter().zip(dh).map(|(a, b)| a + coef * b).collect();
        let uu: Vec<f64> = u.iter().zip(du).map(|(a, b)| a + coef * b).collect();
        (hh, uu)
    };

    let (k1h, k1u) = eval(rhs, u, h)?;
    let (h2, u2) = probe(h, u, dt / 2.0, &k1h, &k1u);
    if guard {
        check_positive_span(&h2, Span::All, nc, "RK4 stage 2")?;
    }
    let (k2h, k2u) = eval(rhs, &u2, &h2)?;
    let (h3, u3) = probe(h, u, dt / 2.0, &k2h, &k2u);
    if guard {
        check_positive_span(&h3, Span::All, nc, "RK4 stage 3")?;
    }
    let (k3h, k3u) = eval(rhs, &u3, &h3)?;
    let (h4, u4) = probe(h, u, dt, &k3h, &k3u);
    if guard {
        check_positive_span(&h4, Span::All, nc, "RK4 stage 4")?;
    }
    let (k4h, k4u) = eval(rhs, &u4, &h4)?;

    let h_new: Vec<f64> = (0..nc)
        .map(|i| h[i] + dt / 6.0 * (k1h[i] + 2.0 * k2h[i] + 2.0 * k3h[i] + k4h[i]))
        .collect();
    let u_new: Vec<f64> = (0..ne)
        .map(|e| u[e] + dt / 6.0 * (k1u[e] + 2.0 * k2u[e] + 2.0 * k3u[e] + k4u[e]))
        .collect();
    if guard {
        check_positive_span(&h_new, Span::All, nc, "RK4 result")?;
    }
    Ok((h_new, u_new))
}

/// One classical RK4 step of the shallow-water system.
pub fn rk4_step(
    mesh: &Mesh,
    state: &State,
    ctx: &mut StepContext,
    mode: RhsMode<'_>,
) -> Result<State> {
    let cfg = ctx.physics;
    let mut rhs = SweRhs {
        mesh,
        cfg: &cfg,
        mode,
        counters: &mut ctx.counters,
    };
    let (h, u) = rk4_step_fields(&state.h, &state.u, ctx.dt, &mut rhs)?;
    Ok(State {
        h,
        u,
        t: state.t + ctx.dt,
    })
}

// ---------------------------------------------------------------------------
// Courant number
// ---------------------------------------------------------------------------

/// Per-edge Courant number (|u_e| + sqrt(g h_e)) dt / d_e; returns the
/// maximum and its edge.
pub fn courant_number(mesh: &Mesh, state: &State, g: f64, dt: f64) -> (f64, usize) {
    let mut max_nu = f64::NEG_INFINITY;
    let mut argmax = 0;
    for e in 0..mesh.n_edges {
        let he = crate::operators::edge_thickness_at(mesh, &state.h, e);
        let nu = (state.u[e].abs() + (g * he).sqrt()) * dt / mesh.d_edge[e];
        if nu > max_nu {
            max_nu = nu;
            argmax = e;
        }
    }
    (max_nu, argmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_periodic_hex_mesh;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// dh/dt = 0, du/dt = a (constant per edge).
    struct ConstantForcing(Vec<f64>);
    impl StageRhs for ConstantForcing {
        fn thickness(&mut self, _u: &[f64], _h: &[f64], out: &mut [f64], cells: Span<'_>) {
            for i in cells.iter(out.len()) {
                out[i] = 0.0;
            }
        }
        fn momentum(&mut self, _u: &[f64], _h: &[f64], out: &mut [f64], edges: Span<'_>) -> crate::Result<()> {
            for e in edges.iter(out.len()) {
                out[e] = self.0[e];
            }
            Ok(())
        }
    }

    /// u' = -h, h' = u (componentwise oscillator).
    struct Oscillator;
    impl StageRhs for Oscillator {
        fn thickness(&mut self, u: &[f64], _h: &[f64], out: &mut [f64], cells: Span<'_>) {
            for i in cells.iter(out.len()) {
                out[i] = u[i];
            }
        }
        fn momentum(&mut self, _u: &[f64], h: &[f64], out: &mut [f64], edges: Span<'_>) -> crate::Result<()> {
            for e in edges.iter(out.len()) {
                out[e] = -h[e];
            }
            Ok(())
        }
        fn guard_positivity(&self) -> bool {
            false
        }
    }

    /// h' = -h, u' = 0 (scalar exponential decay).
    struct Decay;
    impl StageRhs for Decay {
        fn thickness(&mut self, _u: &[f64], h: &[f64], out: &mut [f64], cells: Span<'_>) {
            for i in cells.iter(out.len()) {
                out[i] = -h[i];
            }
        }
        fn momentum(&mut self, _u: &[f64], _h: &[f64], out: &mut [f64], edges: Span<'_>) -> crate::Result<()> {
            for e in edges.iter(out.len()) {
                out[e] = 0.0;
            }
            Ok(())
        }
    }

    #[test]
    fn constant_forcing_integrates_exactly() {
        let a = vec![0.3, -1.7];
        let h0 = vec![2.0, 5.0];
        let u0 = vec![0.1, 0.2];
        let dt = 0.25;
        let stages =
            fbrk32_step_fields(&h0, &u0, dt, FbWeights::default(), &mut ConstantForcing(a.clone()))
                .unwrap();
        for i in 0..2 {
            assert_eq!(stages.h_new[i], h0[i]);
            assert_eq!(stages.u_new[i], u0[i] + dt * a[i]);
        }
        let (h, u) = rk4_step_fields(&h0, &u0, dt, &mut ConstantForcing(a.clone())).unwrap();
        for i in 0..2 {
            assert_eq!(h[i], h0[i]);
            assert!((u[i] - (u0[i] + dt * a[i])).abs() < 1e-16);
        }
    }

    #[test]
    fn oscillator_matches_hand_evaluated_stage_arithmetic() {
        // Independent scalar evaluation of the nine stage formulas.
        let (b1, b2, b3) = (0.531, 0.531, 0.313);
        let dt = 0.1;
        let (u0, h0) = (0.0f64, 1.0f64);

        let hbar1 = h0 + dt / 3.0 * u0;
        let hstar1 = b1 * hbar1 + (1.0 - b1) * h0;
        let ubar1 = u0 + dt / 3.0 * (-hstar1);

        let hbar2 = h0 + dt / 2.0 * ubar1;
        let hstar2 = b2 * hbar2 + (1.0 - b2) * h0;
        let ubar2 = u0 + dt / 2.0 * (-hstar2);

        let hnew = h0 + dt * ubar2;
        let hstar3 = b3 * hnew + (1.0 - 2.0 * b3) * hbar2 + b3 * h0;
        let unew = u0 + dt * (-hstar3);

        let stages =
            fbrk32_step_fields(&[h0], &[u0], dt, FbWeights::default(), &mut Oscillator).unwrap();
        assert!((stages.h_new[0] - hnew).abs() <= 1e-15);
        assert!((stages.u_new[0] - unew).abs() <= 1e-15);
        assert!((stages.h_bar1[0] - hbar1).abs() <= 1e-15);
        assert!((stages.u_bar2[0] - ubar2).abs() <= 1e-15);
    }

    #[test]
    fn zero_weights_reduce_to_base_rk32() {
        // Hand-coded RK(3,2): all averages collapse to h^n or hbar2.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 6;
        let h0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let u0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dt = 0.05;

        let stages = fbrk32_step_fields(&h0, &u0, dt, FbWeights::zero(), &mut Oscillator).unwrap();

        for i in 0..n {
            let ubar1 = u0[i] + dt / 3.0 * (-h0[i]);
            let hbar2 = h0[i] + dt / 2.0 * ubar1;
            let ubar2 = u0[i] + dt / 2.0 * (-h0[i]);
            let hnew = h0[i] + dt * ubar2;
            let unew = u0[i] + dt * (-hbar2);
            assert_eq!(stages.h_new[i], hnew);
            assert_eq!(stages.u_new[i], unew);
        }
    }

    #[test]
    fn fbrk32_is_linear_on_linear_systems() {
        let n = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ha: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ua: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let hb: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ub: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dt = 0.2;
        let w = FbWeights::default();

        let sa = fbrk32_step_fields(&ha, &ua, dt, w, &mut Oscillator).unwrap();
        let sb = fbrk32_step_fields(&hb, &ub, dt, w, &mut Oscillator).unwrap();
        let hsum: Vec<f64> = ha.iter().zip(&hb).map(|(a, b)| a + b).collect();
        let usum: Vec<f64> = ua.iter().zip(&ub).map(|(a, b)| a + b).collect();
        let ssum = fbrk32_step_fields(&hsum, &usum, dt, w, &mut Oscillator).unwrap();
        for i in 0..n {
            assert!((ssum.h_new[i] - (sa.h_new[i] + sb.h_new[i])).abs() < 1e-14);
            assert!((ssum.u_new[i] - (sa.u_new[i] + sb.u_new[i])).abs() < 1e-14);
        }
    }

    #[test]
    fn rk4_scalar_decay_matches_truncated_taylor() {
        let dt = 0.1;
        let (h, _u) = rk4_step_fields(&[1.0], &[0.0], dt, &mut Decay).unwrap();
        let lambda: f64 = -dt;
        let taylor = 1.0 + lambda + lambda * lambda / 2.0 + lambda.powi(3) / 6.0 + lambda.powi(4) / 24.0;
        assert!((h[0] - taylor).abs() < 1e-15, "RK4 on a linear system is the truncated series");
        assert!((taylor - 0.9048375).abs() < 1e-12);
        // Fourth-order agreement with exp(-0.1) = 0.904837418...; the gap is
        // the lambda^5/120 term, about 8.2e-8.
        assert!((h[0] - (-0.1f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn fbrk32_conserves_mass_on_the_periodic_mesh() {
        let mesh = build_periodic_hex_mesh(8, 8, 1000.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let h: Vec<f64> = (0..mesh.n_cells).map(|_| rng.gen_range(90.0..110.0)).collect();
        let u: Vec<f64> = (0..mesh.n_edges).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let state = State::new(&mesh, h, u, 0.0).unwrap();
        let cfg = PhysicsConfig {
            rotation_on: true,
            ..PhysicsConfig::default()
        };
        let mut ctx = StepContext::new(5.0, FbWeights::default(), cfg);
        let next = fbrk32_step(&mesh, &state, &mut ctx, RhsMode::Unsplit).unwrap();
        let mass0: f64 = (0..mesh.n_cells).map(|i| mesh.area_cell[i] * state.h[i]).sum();
        let mass1: f64 = (0..mesh.n_cells).map(|i| mesh.area_cell[i] * next.h[i]).sum();
        assert!(
            ((mass1 - mass0) / mass0).abs() < 1e-13,
            "mass drift {}",
            (mass1 - mass0) / mass0
        );
    }

    #[test]
    fn positivity_abort_names_the_stage() {
        let mesh = build_periodic_hex_mesh(4, 4, 1000.0).unwrap();
        let mut state = State::uniform(&mesh, 0.01);
        // Strong divergence drains cell 0 within one stage.
        for (slot, &e) in mesh.edges_on_cell[0].iter().enumerate() {
            state.u[e] = mesh.edge_sign_on_cell[0][slot] * 5000.0;
        }
        let cfg = PhysicsConfig::gravity_wave(9.80665);
        let mut ctx = StepContext::new(10.0, FbWeights::default(), cfg);
        let err = fbrk32_step(&mesh, &state, &mut ctx, RhsMode::Unsplit).unwrap_err();
        match err {
            Error::NonPositiveThickness { context, .. } => {
                assert!(context.contains("stage 1"), "context: {context}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn courant_number_examples() {
        let mesh = build_periodic_hex_mesh(8, 8, 1000.0).unwrap();
        let state = State::uniform(&mesh, 100.0);
        let g = 9.80665;
        let (nu, _) = courant_number(&mesh, &state, g, 10.0);
        let expect = (g * 100.0f64).sqrt() * 10.0 / 1000.0;
        assert!((nu - expect).abs() < 1e-14, "nu = {nu}, expect {expect}");
        // The wave speed here is ~31.32 m/s.
        assert!((expect - 0.31316).abs() < 1e-4);

        let (nu0, _) = courant_number(&mesh, &state, g, 0.0);
        assert_eq!(nu0, 0.0);

        let (nu2, _) = courant_number(&mesh, &state, g, 20.0);
        assert_eq!(nu2, 2.0 * nu);
    }

    #[test]
    fn frozen_constant_slow_part_is_exact() {
        // A state-independent slow tendency is its own freeze: stepping with
        // the frozen vector equals stepping with the constant evaluated at
        // every stage.
        struct FastPlusConstant<'a> {
            mesh: &'a Mesh,
            cfg: &'a PhysicsConfig,
            a: &'a [f64],
            counters: WorkCounters,
        }
        impl StageRhs for FastPlusConstant<'_> {
            fn thickness(&mut self, u: &[f64], h: &[f64], out: &mut [f64], cells: Span<'_>) {
                thickness_tendency_span(self.mesh, u, h, out, cells, &mut self.counters);
            }
            fn momentum(
                &mut self,
                _u: &[f64],
                h: &[f64],
                out: &mut [f64],
                edges: Span<'_>,
            ) -> crate::Result<()> {
                momentum_fast_span(self.mesh, self.cfg, h, out, edges, &mut self.counters);
                for e in edges.iter(self.mesh.n_edges) {
                    out[e] += self.a[e];
                }
                Ok(())
            }
        }

        let mesh = build_periodic_hex_mesh(6, 6, 1000.0).unwrap();
        let cfg = PhysicsConfig::gravity_wave(9.80665);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a: Vec<f64> = (0..mesh.n_edges).map(|_| rng.gen_range(-1e-4..1e-4)).collect();
        let state = State::uniform(&mesh, 100.0);

        let mut ctx = StepContext::new(5.0, FbWeights::default(), cfg);
        let split = fbrk32_step(&mesh, &state, &mut ctx, RhsMode::Split(&a)).unwrap();

        let mut direct_rhs = FastPlusConstant {
            mesh: &mesh,
            cfg: &cfg,
            a: &a,
            counters: WorkCounters::default(),
        };
        let direct =
            fbrk32_step_fields(&state.h, &state.u, 5.0, FbWeights::default(), &mut direct_rhs)
                .unwrap();
        assert_eq!(split.h, direct.h_new);
        assert_eq!(split.u, direct.u_new);
    }

    #[test]
    fn work_counters_track_stage_evaluations() {
        let mesh = build_periodic_hex_mesh(4, 4, 1000.0).unwrap();
        let state = State::uniform(&mesh, 100.0);
        let cfg = PhysicsConfig::default();
        let mut ctx = StepContext::new(1.0, FbWeights::default(), cfg);
        fbrk32_step(&mesh, &state, &mut ctx, RhsMode::Unsplit).unwrap();
        assert_eq!(ctx.counters.fast_cell_evals, 3 * 16);
        assert_eq!(ctx.counters.fast_edge_evals, 3 * 48);
        assert_eq!(ctx.counters.slow_edge_evals, 3 * 48);

        let frozen = vec![0.0; mesh.n_edges];
        let mut ctx = StepContext::new(1.0, FbWeights::default(), cfg);
        fbrk32_step(&mesh, &state, &mut ctx, RhsMode::Split(&frozen)).unwrap();
        assert_eq!(ctx.counters.fast_cell_evals, 3 * 16);
        assert_eq!(ctx.counters.fast_edge_evals, 3 * 48);
        assert_eq!(ctx.counters.slow_edge_evals, 0);

        let mut ctx = StepContext::new(1.0, FbWeights::default(), cfg);
        rk4_step(&mesh, &state, &mut ctx, RhsMode::Unsplit).unwrap();
        assert_eq!(ctx.counters.fast_cell_evals, 4 * 16);
        assert_eq!(ctx.counters.fast_edge_evals, 4 * 48);
    }
}
