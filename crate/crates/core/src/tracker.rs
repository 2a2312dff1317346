//! Bernoulli-von Mises prediction, information transfer between steps and
//! the sequential per-step loop.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::circular::VonMises;
use crate::model::{ArrayGeometry, EstimatorConfig, PosteriorState, Snapshot};
use crate::valse::{
    init_amplitude, init_components, init_noise, mmse_angle, run_update, valse_update, Diagnostics, UpdateInput,
};
use crate::{Error, Result};

/// Random-walk and birth/death parameters between time steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionModel {
    pub kappa_r: f64,
    pub p_act: f64,
    pub p_deact: f64,
}

impl TransitionModel {
    pub fn new(kappa_r: f64, p_act: f64, p_deact: f64) -> Result<Self> {
        if !(kappa_r > 0.0) {
            return Err(Error::InvalidConfig("kappa_r must be positive"));
        }
        if !((0.0..=1.0).contains(&p_act) && (0.0..=1.0).contains(&p_deact)) {
            return Err(Error::InvalidConfig("transition probabilities must lie in [0, 1]"));
        }
        Ok(Self { kappa_r, p_act, p_deact })
    }

    pub fn from_config(cfg: &EstimatorConfig) -> Self {
        Self { kappa_r: cfg.kappa_r, p_act: cfg.p_act, p_deact: cfg.p_deact }
    }
}

/// One estimated source at one time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackRecord {
    pub t: usize,
    pub component_id: usize,
    pub doa_deg: f64,
    pub pa_rad: f64,
    pub kappa: f64,
    pub weight: Complex64,
    pub active: bool,
}

/// Mean kept, concentration `(1/kappa_r + 1/kappa)^{-1}`.
pub fn predict_theta(prev: &VonMises, tm: &TransitionModel) -> VonMises {
    if prev.is_uniform() {
        return *prev;
    }
    let kappa = 1.0 / (1.0 / tm.kappa_r + 1.0 / prev.kappa());
    VonMises::new_unchecked(prev.mu(), kappa)
}

/// `1 - p^d` for a previously active component, `p^a` otherwise.
pub fn predict_activation(s_prev: bool, tm: &TransitionModel) -> f64 {
    if s_prev {
        1.0 - tm.p_deact
    } else {
        tm.p_act
    }
}

/// Predicted beliefs, priors and activation probabilities for the next step.
#[derive(Clone, Debug, PartialEq)]
pub struct Transfer {
    pub beliefs: Vec<VonMises>,
    /// Predicted von Mises for propagated slots, `None` for re-initialized ones.
    pub priors: Vec<Option<VonMises>>,
    pub rhos: Vec<f64>,
    /// Previous-step index of each propagated slot.
    pub sources: Vec<usize>,
    pub nu0: f64,
    pub tau0: f64,
    pub diagnostics: Diagnostics,
}

/// Carries components that were active, or active at any iteration, into
/// the lowest slots and re-initializes the rest from the residual of
/// `y_next` after fitting the propagated components.
pub fn transfer(prev: &PosteriorState, y_next: &Snapshot, geom: &ArrayGeometry, cfg: &EstimatorConfig) -> Result<Transfer> {
    y_next.check(geom)?;
    cfg.validate()?;
    let l_count = cfg.l_components;
    if prev.beliefs.len() != l_count || prev.s_hat.len() != l_count {
        return Err(Error::DimensionMismatch { expected: l_count, found: prev.beliefs.len() });
    }
    let tm = TransitionModel::from_config(cfg);
    let sources: Vec<usize> =
        (0..l_count).filter(|&l| prev.s_hat[l] || prev.beliefs[l].was_active_any_iter).collect();
    let predicted: Vec<VonMises> = sources.iter().map(|&l| predict_theta(&prev.beliefs[l].theta, &tm)).collect();
    let mut rhos: Vec<f64> = sources.iter().map(|&l| predict_activation(prev.s_hat[l], &tm)).collect();

    let (nu0, nu_clamped) = init_noise(&y_next.y, cfg.snr_init_db);
    let (tau0, tau_clamped) = init_amplitude(&y_next.y, nu0, cfg.rho0, l_count);
    let n_new = l_count - sources.len();
    let beliefs = init_components(&y_next.y, &predicted, n_new, nu0, tau0, cfg.prune_d)?;
    rhos.resize(l_count, tm.p_act);
    let mut priors: Vec<Option<VonMises>> = predicted.into_iter().map(Some).collect();
    priors.resize(l_count, None);
    let diagnostics = Diagnostics { nu_clamped, tau_clamped, ..Diagnostics::default() };
    Ok(Transfer { beliefs, priors, rhos, sources, nu0, tau0, diagnostics })
}

/// Result of one sequential step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub state: PosteriorState,
    pub records: Vec<TrackRecord>,
    pub diagnostics: Diagnostics,
}

/// Active components as output rows. Components whose mean lies outside
/// the visible region have no DOA and are left out.
pub fn track_records(state: &PosteriorState, geom: &ArrayGeometry) -> Vec<TrackRecord> {
    state
        .active()
        .iter()
        .enumerate()
        .filter_map(|(pos, &l)| {
            let theta = state.beliefs[l].theta;
            let pa = mmse_angle(&theta).ok()?;
            let doa = geom.pa_to_doa(pa).ok()?;
            Some(TrackRecord {
                t: state.t,
                component_id: l,
                doa_deg: doa,
                pa_rad: pa,
                kappa: theta.kappa(),
                weight: state.w_hat[pos],
                active: true,
            })
        })
        .collect()
}

/// One time step: a plain update without a previous state, otherwise
/// transfer followed by an update with the predicted priors.
pub fn svalse_step(
    prev: Option<&PosteriorState>,
    y: &Snapshot,
    geom: &ArrayGeometry,
    cfg: &EstimatorConfig,
) -> Result<StepOutput> {
    let (state, diagnostics) = match prev {
        None => valse_update(y, geom, cfg)?,
        Some(prev) => {
            let tr = transfer(prev, y, geom, cfg)?;
            let input = UpdateInput { beliefs: tr.beliefs, priors: tr.priors, rhos: tr.rhos, nu: tr.nu0, tau: tr.tau0 };
            let (state, mut diag) = run_update(y, input, cfg)?;
            diag.nu_clamped |= tr.diagnostics.nu_clamped;
            diag.tau_clamped |= tr.diagnostics.tau_clamped;
            (state, diag)
        }
    };
    let records = track_records(&state, geom);
    Ok(StepOutput { state, records, diagnostics })
}

fn check_sequence(snapshots: &[Snapshot], geom: &ArrayGeometry) -> Result<()> {
    if snapshots.is_empty() {
        return Err(Error::Domain("snapshot sequence is empty"));
    }
    snapshots.iter().try_for_each(|s| s.check(geom))
}

/// Sequential estimation over a snapshot sequence.
pub fn run_sequence(snapshots: &[Snapshot], geom: &ArrayGeometry, cfg: &EstimatorConfig) -> Result<Vec<TrackRecord>> {
    check_sequence(snapshots, geom)?;
    let mut records = Vec::new();
    let mut prev: Option<PosteriorState> = None;
    for y in snapshots {
        let out = svalse_step(prev.as_ref(), y, geom, cfg)?;
        records.extend(out.records);
        prev = Some(out.state);
    }
    Ok(records)
}

/// Every snapshot estimated on its own, without transfer.
pub fn run_independent(snapshots: &[Snapshot], geom: &ArrayGeometry, cfg: &EstimatorConfig) -> Result<Vec<TrackRecord>> {
    check_sequence(snapshots, geom)?;
    let mut records = Vec::new();
    for y in snapshots {
        records.extend(svalse_step(None, y, geom, cfg)?.records);
    }
    Ok(records)
}
