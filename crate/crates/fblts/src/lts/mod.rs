//! The multirate (local time-stepping) step built on FB-RK(3,2): coarse
//! advancement on restricted stage extents, second-order interface
//! prediction per subcycle, fine advancement with the fine step, and the
//! flux-sum interface correction that restores exact conservation.
//!
//! Data layout during a step: every stage field is a full-length array.
//! After coarse advancement the arrays hold uncorrected (tilde) data on both
//! interface layers, final (bar) data on the coarse interior, and scratch on
//! the interface-adjacent fine layers. Fine advancement clones them, then per
//! subcycle overwrites the fine region with fine stage data and interface one
//! with predictions, leaving interface two and the interior frozen — which is
//! exactly the substitution rule the correction sums require.

mod labels;

pub use labels::{
    all_coarse_labels, label_regions, validate_labels, LabelViolation, LtsLabels, Region,
};

use std::time::Instant;

use crate::error::Error;
use crate::mesh::Mesh;
use crate::operators::{pv_flux_field, Span, State};
use crate::steppers::{
    fb_avg2_span, fb_avg3_span, stage_update_span, RhsMode, StageRhs, StepContext, SweRhs,
};
use crate::Result;

/// Multirate step options.
#[derive(Debug, Clone, Copy)]
pub struct LtsOptions {
    /// Subcycling factor: the fine region advances with dt/m, m times.
    pub m: usize,
    /// Run the coarse-advancement scratch stages on the whole fine region
    /// instead of the shrinking interface-adjacent sets. Changes work
    /// counts, never results.
    pub wide_halo: bool,
    /// Record the absolute-vorticity fluxes needed by the prognostic
    /// companion field.
    pub record_fluxes: bool,
}

impl LtsOptions {
    pub fn new(m: usize) -> LtsOptions {
        LtsOptions {
            m,
            wide_halo: false,
            record_fluxes: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("subcycling factor m must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stage data retained from coarse advancement plus the correction
/// accumulators. Arrays are full length; see the module docs for which
/// regions hold meaningful values.
#[derive(Debug, Clone)]
pub struct InterfaceCache {
    pub h_base: Vec<f64>,
    pub u_base: Vec<f64>,
    pub h_bar1: Vec<f64>,
    pub h_star1: Vec<f64>,
    pub u_bar1: Vec<f64>,
    pub h_bar2: Vec<f64>,
    pub h_star2: Vec<f64>,
    pub u_bar2: Vec<f64>,
    pub h_bar3: Vec<f64>,
    pub h_star3: Vec<f64>,
    pub u_bar3: Vec<f64>,
    /// Correction sums over subcycles, nonzero only on interface cells/edges.
    pub sum_dh: Vec<f64>,
    pub sum_du: Vec<f64>,
    /// Number of subcycle summands accumulated so far.
    pub summands: usize,
}

/// Absolute-vorticity fluxes recorded for the prognostic companion: the
/// coarse stage-2 field plus one field per subcycle evaluated on the
/// composite (fine + predicted + frozen) stage-2 data.
#[derive(Debug, Clone)]
pub struct VorticityFluxRecord {
    pub coarse: Vec<f64>,
    pub fine: Vec<Vec<f64>>,
}

/// Result of one multirate step.
#[derive(Debug)]
pub struct LtsStepResult {
    pub state: State,
    pub fluxes: Option<VorticityFluxRecord>,
    /// Wall seconds per phase: coarse, predict, fine, correct.
    pub phase_seconds: [f64; 4],
}

fn check_positive_region(
    h: &[f64],
    span: &[usize],
    labels: &LtsLabels,
    context: &str,
) -> Result<()> {
    for &i in span {
        if !(h[i] > 0.0) {
            return Err(Error::NonPositiveThickness {
                cell: i,
                value: h[i],
                context: format!("{context} ({:?} region)", labels.cell_region[i]),
            });
        }
    }
    Ok(())
}

/// Phase 1: run all three FB-RK(3,2) stages with the coarse step on the
/// stage extents. Coarse-interior values come out final; both interface
/// layers come out uncorrected; interface-adjacent fine layers hold scratch.
pub fn coarse_advance(
    mesh: &Mesh,
    state: &State,
    labels: &LtsLabels,
    ctx: &mut StepContext,
    opts: &LtsOptions,
    mode: RhsMode<'_>,
) -> Result<InterfaceCache> {
    let dt = ctx.dt;
    let w = ctx.weights;
    let cfg = ctx.physics;
    let mut rhs = SweRhs {
        mesh,
        cfg: &cfg,
        mode,
        counters: &mut ctx.counters,
    };

    let h_ext = if opts.wide_halo {
        &labels.h_stage_cells_wide
    } else {
        &labels.h_stage_cells
    };
    let u_ext = if opts.wide_halo {
        &labels.u_stage_edges_wide
    } else {
        &labels.u_stage_edges
    };

    let nc = mesh.n_cells;
    let ne = mesh.n_edges;
    let h_base = state.h.clone();
    let u_base = state.u.clone();
    let mut dh = vec![0.0; nc];
    let mut du = vec![0.0; ne];

    // Stage arrays start as copies of the base state so entries outside the
    // extents stay well defined.
    let mut h_bar1 = h_base.clone();
    let mut h_star1 = h_base.clone();
    let mut u_bar1 = u_base.clone();
    let mut h_bar2 = h_base.clone();
    let mut h_star2 = h_base.clone();
    let mut u_bar2 = u_base.clone();
    let mut h_bar3 = h_base.clone();
    let mut h_star3 = h_base.clone();
    let mut u_bar3 = u_base.clone();

    // Stage 1 at dt/3.
    rhs.thickness(&u_base, &h_base, &mut dh, Span::Only(&h_ext[0]));
    stage_update_span(&h_base, dt / 3.0, &dh, &mut h_bar1, Span::Only(&h_ext[0]), nc);
    check_positive_region(&h_bar1, &h_ext[0], labels, "coarse advancement stage 1")?;
    fb_avg2_span(w.beta1, &h_bar1, &h_base, &mut h_star1, Span::Only(&h_ext[0]), nc);
    rhs.momentum(&u_base, &h_star1, &mut du, Span::Only(&u_ext[0]))?;
    stage_update_span(&u_base, dt / 3.0, &du, &mut u_bar1, Span::Only(&u_ext[0]), ne);

    // Stage 2 at dt/2.
    rhs.thickness(&u_bar1, &h_bar1, &mut dh, Span::Only(&h_ext[1]));
    stage_update_span(&h_base, dt / 2.0, &dh, &mut h_bar2, Span::Only(&h_ext[1]), nc);
    check_positive_region(&h_bar2, &h_ext[1], labels, "coarse advancement stage 2")?;
    fb_avg2_span(w.beta2, &h_bar2, &h_base, &mut h_star2, Span::Only(&h_ext[1]), nc);
    rhs.momentum(&u_bar1, &h_star2, &mut du, Span::Only(&u_ext[1]))?;
    stage_update_span(&u_base, dt / 2.0, &du, &mut u_bar2, Span::Only(&u_ext[1]), ne);

    // Stage 3 at dt.
    rhs.thickness(&u_bar2, &h_bar2, &mut dh, Span::Only(&h_ext[2]));
    stage_update_span(&h_base, dt, &dh, &mut h_bar3, Span::Only(&h_ext[2]), nc);
    check_positive_region(&h_bar3, &h_ext[2], labels, "coarse advancement stage 3")?;
    fb_avg3_span(
        w.beta3,
        &h_bar3,
        &h_bar2,
        &h_base,
        &mut h_star3,
        Span::Only(&h_ext[2]),
        nc,
    );
    rhs.momentum(&u_bar2, &h_star3, &mut du, Span::Only(&u_ext[2]))?;
    stage_update_span(&u_base, dt, &du, &mut u_bar3, Span::Only(&u_ext[2]), ne);

    Ok(InterfaceCache {
        h_base,
        u_base,
        h_bar1,
        h_star1,
        u_bar1,
        h_bar2,
        h_star2,
        u_bar2,
        h_bar3,
        h_star3,
        u_bar3,
        sum_dh: vec![0.0; nc],
        sum_du: vec![0.0; ne],
        summands: 0,
    })
}

/// Interface-one data predicted at one subcycle, aligned with
/// `labels.if1_cells` / `labels.if1_edges`.
#[derive(Debug, Clone)]
pub struct IfPrediction {
    pub k: usize,
    pub h_base: Vec<f64>,
    pub u_base: Vec<f64>,
    /// Base-level prediction at k+1, needed by the stage-3 average.
    pub h_base_next: Vec<f64>,
    pub h_s1: Vec<f64>,
    pub u_s1: Vec<f64>,
    pub h_s2: Vec<f64>,
    pub u_s2: Vec<f64>,
    pub h_star1: Vec<f64>,
    pub h_star2: Vec<f64>,
    pub h_star3: Vec<f64>,
}

/// Base-level prediction on interface one at subcycle k (0 <= k <= m):
/// the linear blend (k/m) uncorrected-new + (1 - k/m) old.
pub fn predict_base_level(
    cache: &InterfaceCache,
    labels: &LtsLabels,
    k: usize,
    m: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if k > m {
        return Err(Error::SubcycleIndex {
            k,
            m,
            message: "base-level prediction allows k up to m only".into(),
        });
    }
    let a = k as f64 / m as f64;
    let b = 1.0 - a;
    let h = labels
        .if1_cells
        .iter()
        .map(|&i| a * cache.h_bar3[i] + b * cache.h_base[i])
        .collect();
    let u = labels
        .if1_edges
        .iter()
        .map(|&e| a * cache.u_bar3[e] + b * cache.u_base[e])
        .collect();
    Ok((h, u))
}

/// Full interface-one prediction for subcycle k (0 <= k < m): base level,
/// first and second stage data, and the three forward-backward averages.
pub fn predict_interface(
    cache: &InterfaceCache,
    labels: &LtsLabels,
    k: usize,
    m: usize,
    weights: crate::steppers::FbWeights,
) -> Result<IfPrediction> {
    if k >= m {
        return Err(Error::SubcycleIndex {
            k,
            m,
            message: "stage predictions exist for k < m".into(),
        });
    }
    let (h_base, u_base) = predict_base_level(cache, labels, k, m)?;
    let (h_base_next, _) = predict_base_level(cache, labels, k + 1, m)?;

    let a = k as f64 / m as f64;
    let c = 1.0 / m as f64;
    let d = 1.0 - (k + 1) as f64 / m as f64;

    let stage_pred_h = |bar: &[f64]| -> Vec<f64> {
        labels
            .if1_cells
            .iter()
            .map(|&i| a * cache.h_bar3[i] + c * bar[i] + d * cache.h_base[i])
            .collect()
    };
    let stage_pred_u = |bar: &[f64]| -> Vec<f64> {
        labels
            .if1_edges
            .iter()
            .map(|&e| a * cache.u_bar3[e] + c * bar[e] + d * cache.u_base[e])
            .collect()
    };

    let h_s1 = stage_pred_h(&cache.h_bar1);
    let u_s1 = stage_pred_u(&cache.u_bar1);
    let h_s2 = stage_pred_h(&cache.h_bar2);
    let u_s2 = stage_pred_u(&cache.u_bar2);

    let h_star1: Vec<f64> = h_s1
        .iter()
        .zip(&h_base)
        .map(|(&s, &b)| crate::steppers::fb_avg2(weights.beta1, s, b))
        .collect();
    let h_star2: Vec<f64> = h_s2
        .iter()
        .zip(&h_base)
        .map(|(&s, &b)| crate::steppers::fb_avg2(weights.beta2, s, b))
        .collect();
    let h_star3: Vec<f64> = h_base_next
        .iter()
        .zip(&h_s2)
        .zip(&h_base)
        .map(|((&n, &mid), &b)| crate::steppers::fb_avg3(weights.beta3, n, mid, b))
        .collect();

    Ok(IfPrediction {
        k,
        h_base,
        u_base,
        h_base_next,
        h_s1,
        u_s1,
        h_s2,
        u_s2,
        h_star1,
        h_star2,
        h_star3,
    })
}

fn scatter(dst: &mut [f64], idx: &[usize], src: &[f64]) {
    for (slot, &i) in idx.iter().enumerate() {
        dst[i] = src[slot];
    }
}

/// Phases 2+3: advance the fine region m times with the fine step, reading
/// interface-one predictions where stencils cross the interface, and
/// accumulate the correction summands on both interface layers. Returns the
/// full-length (h, u) working arrays whose fine entries are final, plus the
/// seconds spent on prediction and the recorded vorticity fluxes.
#[allow(clippy::type_complexity)]
pub fn fine_advance(
    mesh: &Mesh,
    labels: &LtsLabels,
    cache: &mut InterfaceCache,
    ctx: &mut StepContext,
    opts: &LtsOptions,
    mode: RhsMode<'_>,
) -> Result<(Vec<f64>, Vec<f64>, f64, Option<VorticityFluxRecord>)> {
    let m = opts.m;
    let dt = ctx.dt;
    let dtf = dt / m as f64;
    let w = ctx.weights;
    let cfg = ctx.physics;
    let nc = mesh.n_cells;
    let ne = mesh.n_edges;

    let mut record = if opts.record_fluxes {
        Some(VorticityFluxRecord {
            coarse: pv_flux_field(mesh, &cfg, &cache.u_bar2, &cache.h_bar2)?,
            fine: Vec::with_capacity(m),
        })
    } else {
        None
    };

    let mut base_h = cache.h_base.clone();
    let mut base_u = cache.u_base.clone();
    let mut wh1 = cache.h_bar1.clone();
    let mut ws1 = cache.h_star1.clone();
    let mut wu1 = cache.u_bar1.clone();
    let mut wh2 = cache.h_bar2.clone();
    let mut ws2 = cache.h_star2.clone();
    let mut wu2 = cache.u_bar2.clone();
    let mut ws3 = cache.h_star3.clone();
    let mut next_h = vec![0.0; nc];
    let mut next_u = vec![0.0; ne];
    let mut dh = vec![0.0; nc];
    let mut du = vec![0.0; ne];

    let fine_c = Span::Only(&labels.fine_cells);
    let fine_e = Span::Only(&labels.fine_edges);
    let mut predict_secs = 0.0;

    for k in 0..m {
        let t_pred = Instant::now();
        let pred = predict_interface(cache, labels, k, m, w)?;
        scatter(&mut base_h, &labels.if1_cells, &pred.h_base);
        scatter(&mut base_u, &labels.if1_edges, &pred.u_base);
        scatter(&mut wh1, &labels.if1_cells, &pred.h_s1);
        scatter(&mut ws1, &labels.if1_cells, &pred.h_star1);
        scatter(&mut wu1, &labels.if1_edges, &pred.u_s1);
        scatter(&mut wh2, &labels.if1_cells, &pred.h_s2);
        scatter(&mut ws2, &labels.if1_cells, &pred.h_star2);
        scatter(&mut wu2, &labels.if1_edges, &pred.u_s2);
        scatter(&mut ws3, &labels.if1_cells, &pred.h_star3);
        predict_secs += t_pred.elapsed().as_secs_f64();

        let mut rhs = SweRhs {
            mesh,
            cfg: &cfg,
            mode,
            counters: &mut ctx.counters,
        };

        // Stage 1 at dtf/3.
        rhs.thickness(&base_u, &base_h, &mut dh, fine_c);
        stage_update_span(&base_h, dtf / 3.0, &dh, &mut wh1, fine_c, nc);
        check_positive_region(
            &wh1,
            &labels.fine_cells,
            labels,
            &format!("fine advancement subcycle {k} stage 1"),
        )?;
        fb_avg2_span(w.beta1, &wh1, &base_h, &mut ws1, fine_c, nc);
        rhs.momentum(&base_u, &ws1, &mut du, fine_e)?;
        stage_update_span(&base_u, dtf / 3.0, &du, &mut wu1, fine_e, ne);

        // Stage 2 at dtf/2.
        rhs.thickness(&wu1, &wh1, &mut dh, fine_c);
        stage_update_span(&base_h, dtf / 2.0, &dh, &mut wh2, fine_c, nc);
        check_positive_region(
            &wh2,
            &labels.fine_cells,
            labels,
            &format!("fine advancement subcycle {k} stage 2"),
        )?;
        fb_avg2_span(w.beta2, &wh2, &base_h, &mut ws2, fine_c, nc);
        rhs.momentum(&wu1, &ws2, &mut du, fine_e)?;
        stage_update_span(&base_u, dtf / 2.0, &du, &mut wu2, fine_e, ne);

        // Stage 3 at dtf: the same evaluation advances the fine region and
        // supplies the interface correction summands.
        rhs.thickness(&wu2, &wh2, &mut dh, Span::Only(&labels.stage3_cells));
        stage_update_span(&base_h, dtf, &dh, &mut next_h, fine_c, nc);
        check_positive_region(
            &next_h,
            &labels.fine_cells,
            labels,
            &format!("fine advancement subcycle {k} stage 3"),
        )?;
        for &i in &labels.if12_cells {
            cache.sum_dh[i] += dh[i];
        }
        fb_avg3_span(w.beta3, &next_h, &wh2, &base_h, &mut ws3, fine_c, nc);
        rhs.momentum(&wu2, &ws3, &mut du, Span::Only(&labels.stage3_edges))?;
        stage_update_span(&base_u, dtf, &du, &mut next_u, fine_e, ne);
        for &e in &labels.if12_edges {
            cache.sum_du[e] += du[e];
        }
        cache.summands += 1;

        if let Some(rec) = record.as_mut() {
            rec.fine.push(pv_flux_field(mesh, &cfg, &wu2, &wh2)?);
        }

        for &i in &labels.fine_cells {
            base_h[i] = next_h[i];
        }
        for &e in &labels.fine_edges {
            base_u[e] = next_u[e];
        }
    }

    Ok((base_h, base_u, predict_secs, record))
}

/// Corrected interface values, aligned with `labels.if12_cells` and
/// `labels.if12_edges`.
#[derive(Debug, Clone)]
pub struct CorrectedInterface {
    pub h: Vec<f64>,
    pub u: Vec<f64>,
}

/// Phase 4: replace the uncorrected interface data with the flux-sum values
/// h^n + (dt/m) * sum_k Psi, u^n + (dt/m) * sum_k Phi.
pub fn correct_interface(
    labels: &LtsLabels,
    cache: &InterfaceCache,
    dt: f64,
    m: usize,
) -> Result<CorrectedInterface> {
    if cache.summands != m {
        return Err(Error::Internal(format!(
            "interface correction expected {m} accumulated summands, found {}",
            cache.summands
        )));
    }
    let coef = dt / m as f64;
    let h: Vec<f64> = labels
        .if12_cells
        .iter()
        .map(|&i| cache.h_base[i] + coef * cache.sum_dh[i])
        .collect();
    for (slot, &i) in labels.if12_cells.iter().enumerate() {
        if !(h[slot] > 0.0) {
            return Err(Error::NonPositiveThickness {
                cell: i,
                value: h[slot],
                context: format!("interface correction ({:?} region)", labels.cell_region[i]),
            });
        }
    }
    let u: Vec<f64> = labels
        .if12_edges
        .iter()
        .map(|&e| cache.u_base[e] + coef * cache.sum_du[e])
        .collect();
    Ok(CorrectedInterface { h, u })
}

/// One full multirate step: coarse advancement, per-subcycle prediction,
/// fine advancement, interface correction. Every cell and edge ends at
/// t + dt exactly once.
pub fn fblts_step(
    mesh: &Mesh,
    state: &State,
    labels: &LtsLabels,
    ctx: &mut StepContext,
    opts: &LtsOptions,
    mode: RhsMode<'_>,
) -> Result<LtsStepResult> {
    opts.validate()?;

    let t0 = Instant::now();
    let mut cache = coarse_advance(mesh, state, labels, ctx, opts, mode)?;
    let coarse_secs = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (fine_h, fine_u, predict_secs, fluxes) =
        fine_advance(mesh, labels, &mut cache, ctx, opts, mode)?;
    let fine_secs = t1.elapsed().as_secs_f64() - predict_secs;

    let t2 = Instant::now();
    let corrected = correct_interface(labels, &cache, ctx.dt, opts.m)?;
    let correct_secs = t2.elapsed().as_secs_f64();

    let mut h = state.h.clone();
    let mut u = state.u.clone();
    for &i in &labels.coarse_int_cells {
        h[i] = cache.h_bar3[i];
    }
    for &e in &labels.coarse_int_edges {
        u[e] = cache.u_bar3[e];
    }
    scatter(&mut h, &labels.if12_cells, &corrected.h);
    scatter(&mut u, &labels.if12_edges, &corrected.u);
    for &i in &labels.fine_cells {
        h[i] = fine_h[i];
    }
    for &e in &labels.fine_edges {
        u[e] = fine_u[e];
    }

    Ok(LtsStepResult {
        state: State {
            h,
            u,
            t: state.t + ctx.dt,
        },
        fluxes,
        phase_seconds: [coarse_secs, predict_secs, fine_secs, correct_secs],
    })
}

/// Closed-form fast-tendency evaluation counts for one multirate step,
/// derived from the region sizes and stage extents: three coarse stages on
/// their extents plus, per subcycle, two fine-only stages and one stage
/// shared with the interface correction.
pub fn predicted_fast_evals(labels: &LtsLabels, m: usize, wide_halo: bool) -> (u64, u64) {
    let h_ext = if wide_halo {
        &labels.h_stage_cells_wide
    } else {
        &labels.h_stage_cells
    };
    let u_ext = if wide_halo {
        &labels.u_stage_edges_wide
    } else {
        &labels.u_stage_edges
    };
    let cells = h_ext.iter().map(|s| s.len() as u64).sum::<u64>()
        + m as u64 * (2 * labels.fine_cells.len() as u64 + labels.stage3_cells.len() as u64);
    let edges = u_ext.iter().map(|s| s.len() as u64).sum::<u64>()
        + m as u64 * (2 * labels.fine_edges.len() as u64 + labels.stage3_edges.len() as u64);
    (cells, edges)
}
