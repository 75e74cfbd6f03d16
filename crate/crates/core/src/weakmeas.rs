//! Polarization-pointer weak measurement: calcite coupling, strong
//! post-selection through the lens relay, circular-polarization readout and
//! arcsine extraction of the real weak value.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Representation, WavefieldGrid};
use crate::optics::{apply_ray_matrix, LensSystem, RayMatrix};
use crate::profile::WeakValueProfile;
use crate::scene::SlitScene;
use crate::wavepacket::{momentum_rep_with, position_rep_with, FreeEvolution};

/// Calcite coupling strength of the reference setup.
pub const DEFAULT_ZETA: f64 = 134.49;

/// Largest `ζ · max|ϑ_w|` accepted without a warning.
pub const WEAK_LIMIT: f64 = 0.3;

/// Points below this fraction of peak counts are ignored when judging
/// how weak a coupling is.
const WEAK_LIMIT_SUPPORT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoupledObservable {
    TransverseMomentum,
    EffectivePosition,
}

impl CoupledObservable {
    /// Representation in which the observable is diagonal.
    pub fn representation(self) -> Representation {
        match self {
            Self::TransverseMomentum => Representation::Momentum,
            Self::EffectivePosition => Representation::Position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalciteConfig {
    /// Coupling per unit of the observable (rad per rad, or rad per metre).
    pub zeta: f64,
    pub phi0_list: Vec<f64>,
    pub coupled_observable: CoupledObservable,
}

impl Default for CalciteConfig {
    fn default() -> Self {
        Self {
            zeta: DEFAULT_ZETA,
            phi0_list: (-3..=3).map(|i| i as f64 * 0.1).collect(),
            coupled_observable: CoupledObservable::TransverseMomentum,
        }
    }
}

impl CalciteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return Err(Error::config(format!("zeta must be positive, got {}", self.zeta)));
        }
        if self.phi0_list.is_empty() {
            return Err(Error::config("phi0_list must not be empty"));
        }
        if self.phi0_list.iter().any(|p| !p.is_finite()) {
            return Err(Error::config("phi0_list entries must be finite"));
        }
        Ok(())
    }
}

/// Additive background and optional intensity jitter on the two readout channels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Uniform intensity added to each channel, as a fraction of the peak total.
    pub background_fraction: f64,
    /// Gaussian jitter with standard deviation `shot_scale · sqrt(I · peak)`.
    pub shot_scale: f64,
    pub rng_seed: u64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.background_fraction >= 0.0 && self.background_fraction.is_finite()) {
            return Err(Error::config("background_fraction must be >= 0"));
        }
        if !(self.shot_scale >= 0.0 && self.shot_scale.is_finite()) {
            return Err(Error::config("shot_scale must be >= 0"));
        }
        Ok(())
    }

    pub fn is_silent(&self) -> bool {
        self.background_fraction == 0.0 && self.shot_scale == 0.0
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed)
    }
}

/// Transverse field with a polarization pointer, in the `H`/`V` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedField {
    pub representation: Representation,
    pub axis: Vec<f64>,
    pub plane_z: f64,
    pub amp_h: Vec<Complex64>,
    pub amp_v: Vec<Complex64>,
}

impl PolarizedField {
    pub fn from_components(h: &WavefieldGrid, v: &WavefieldGrid) -> Result<Self> {
        if h.representation != v.representation || h.axis != v.axis {
            return Err(Error::domain("polarization components must share an axis"));
        }
        Ok(Self {
            representation: h.representation,
            axis: h.axis.clone(),
            plane_z: h.plane_z,
            amp_h: h.amplitudes.clone(),
            amp_v: v.amplitudes.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn component_h(&self) -> Result<WavefieldGrid> {
        WavefieldGrid::new(self.representation, self.axis.clone(), self.amp_h.clone(), self.plane_z)
    }

    pub fn component_v(&self) -> Result<WavefieldGrid> {
        WavefieldGrid::new(self.representation, self.axis.clone(), self.amp_v.clone(), self.plane_z)
    }

    /// Applies the same spatial transform to both components.
    pub fn map_components<F>(&self, transform: F) -> Result<Self>
    where
        F: Fn(&WavefieldGrid) -> Result<WavefieldGrid>,
    {
        Self::from_components(&transform(&self.component_h()?)?, &transform(&self.component_v()?)?)
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amp_h
            .iter()
            .zip(&self.amp_v)
            .map(|(h, v)| h.norm_sqr() + v.norm_sqr())
            .collect()
    }

    pub fn norm(&self) -> f64 {
        let step = if self.len() > 1 { self.axis[1] - self.axis[0] } else { 1.0 };
        self.intensity().iter().sum::<f64>() * step
    }

    /// Per-point `[S0, S1, S2, S3]` with `S1 = |H|² − |V|²`, `S2 = 2 Re(H*V)`
    /// and `S3 = 2 Im(H*V) = I_R − I_L`.
    pub fn stokes(&self) -> Vec<[f64; 4]> {
        self.amp_h
            .iter()
            .zip(&self.amp_v)
            .map(|(h, v)| {
                let cross = h.conj() * v;
                [
                    h.norm_sqr() + v.norm_sqr(),
                    h.norm_sqr() - v.norm_sqr(),
                    2.0 * cross.re,
                    2.0 * cross.im,
                ]
            })
            .collect()
    }
}

/// Diagonal pointer: `H = V = ψ/√2`.
pub fn prepare_diagonal(field: &WavefieldGrid) -> PolarizedField {
    let amp: Vec<Complex64> = field
        .amplitudes
        .iter()
        .map(|a| a * std::f64::consts::FRAC_1_SQRT_2)
        .collect();
    PolarizedField {
        representation: field.representation,
        axis: field.axis.clone(),
        plane_z: field.plane_z,
        amp_h: amp.clone(),
        amp_v: amp,
    }
}

/// Exact calcite unitary in the eigenbasis of the coupled observable (the
/// field axis): `H ← H e^{−i(ζϑ+φ₀)/2}`, `V ← V e^{+i(ζϑ+φ₀)/2}`.
pub fn apply_calcite_exact(pol: &PolarizedField, cfg: &CalciteConfig, phi0: f64) -> Result<PolarizedField> {
    let expected = cfg.coupled_observable.representation();
    if pol.representation != expected {
        return Err(Error::Representation {
            expected,
            found: pol.representation,
        });
    }
    let mut out = pol.clone();
    for ((h, v), &theta) in out.amp_h.iter_mut().zip(out.amp_v.iter_mut()).zip(&pol.axis) {
        let half = Complex64::from_polar(1.0, 0.5 * (cfg.zeta * theta + phi0));
        *h /= half;
        *v *= half;
    }
    Ok(out)
}

/// Right- and left-circular intensities `|H ∓ iV|²/2`.
pub fn readout_circular(pol: &PolarizedField) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::i();
    pol.amp_h
        .iter()
        .zip(&pol.amp_v)
        .map(|(h, v)| ((h - i * v).norm_sqr() / 2.0, (h + i * v).norm_sqr() / 2.0))
        .unzip()
}

/// Adds `background_fraction · peak` to both channels, then Gaussian jitter
/// drawn from `rng`. The peak is the largest total intensity.
pub fn inject_noise_with(
    right: &[f64],
    left: &[f64],
    noise: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    noise.validate()?;
    let peak = right
        .iter()
        .zip(left)
        .map(|(r, l)| r + l)
        .fold(0.0, f64::max);
    let background = noise.background_fraction * peak;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut jitter = |i: f64| {
        if noise.shot_scale > 0.0 {
            i + noise.shot_scale * (i.max(0.0) * peak).sqrt() * unit.sample(rng)
        } else {
            i
        }
    };
    let right = right.iter().map(|&r| jitter(r + background)).collect();
    let left = left.iter().map(|&l| jitter(l + background)).collect();
    Ok((right, left))
}

/// [`inject_noise_with`] using a fresh generator seeded from the model.
pub fn inject_noise(right: &[f64], left: &[f64], noise: &NoiseModel) -> Result<(Vec<f64>, Vec<f64>)> {
    inject_noise_with(right, left, noise, &mut noise.rng())
}

/// Per-point result of the arcsine inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// `asin(contrast) − φ₀`; NaN where undefined.
    pub phase: Vec<f64>,
    pub clamped: Vec<bool>,
    /// Zero total intensity.
    pub undefined: Vec<bool>,
}

impl Extraction {
    pub fn scaled(&self, zeta: f64) -> Vec<f64> {
        self.phase.iter().map(|p| p / zeta).collect()
    }
}

pub fn extract_phase(right: &[f64], left: &[f64], phi0: f64) -> Extraction {
    let n = right.len();
    let mut out = Extraction {
        phase: Vec::with_capacity(n),
        clamped: vec![false; n],
        undefined: vec![false; n],
    };
    for (i, (&r, &l)) in right.iter().zip(left).enumerate() {
        let total = r + l;
        if total == 0.0 || !total.is_finite() {
            out.undefined[i] = true;
            out.phase.push(f64::NAN);
            continue;
        }
        let mut contrast = (r - l) / total;
        if contrast.abs() > 1.0 {
            out.clamped[i] = true;
            contrast = contrast.clamp(-1.0, 1.0);
        }
        out.phase.push(contrast.asin() - phi0);
    }
    out
}

/// `(asin((I_R − I_L)/(I_R + I_L)) − φ₀) / ζ`, with clamp and undefined flags.
pub fn extract_weak_value(right: &[f64], left: &[f64], zeta: f64, phi0: f64) -> (Vec<f64>, Extraction) {
    let e = extract_phase(right, left, phi0);
    (e.scaled(zeta), e)
}

/// Per-point mean and population standard deviation across tilt profiles
/// sharing one axis. Counts are averaged and flags combined.
pub fn tilt_average(profiles: &[WeakValueProfile]) -> Result<WeakValueProfile> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::domain("tilt average needs at least one profile"))?;
    if profiles.iter().any(|p| p.axis != first.axis) {
        return Err(Error::domain("tilt profiles must share an axis"));
    }
    let n = profiles.len() as f64;
    let mut out = first.clone();
    for i in 0..first.len() {
        let mean = profiles.iter().map(|p| p.value[i]).sum::<f64>() / n;
        let var = profiles.iter().map(|p| (p.value[i] - mean).powi(2)).sum::<f64>() / n;
        out.value[i] = mean;
        out.spread[i] = var.sqrt();
        out.counts[i] = profiles.iter().map(|p| p.counts[i]).sum::<f64>() / n;
        out.flagged[i] = profiles.iter().any(|p| p.flagged[i]);
    }
    Ok(out)
}

/// Tilt-averaged profile plus bookkeeping from one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub profile: WeakValueProfile,
    /// One profile per entry of `phi0_list`.
    pub per_tilt: Vec<WeakValueProfile>,
    pub clamped: usize,
    pub undefined: usize,
    /// `ζ · max|ϑ_w|` over well-supported points.
    pub weak_parameter: f64,
}

/// Camera-side readout for every tilt, mapped back to the physical axis.
struct Readout<'a> {
    axis_label: &'a str,
    value_label: &'a str,
    zeta: f64,
    /// Camera coordinate per unit of the reported axis.
    scale: f64,
}

impl Readout<'_> {
    fn run<F>(&self, cfg: &CalciteConfig, noise: &NoiseModel, camera_field: F) -> Result<PipelineReport>
    where
        F: Fn(f64) -> Result<PolarizedField>,
    {
        let mut rng = noise.rng();
        let mut per_tilt = Vec::with_capacity(cfg.phi0_list.len());
        let (mut clamped, mut undefined) = (0, 0);
        for &phi0 in &cfg.phi0_list {
            let camera = camera_field(phi0)?;
            let (r, l) = readout_circular(&camera);
            let (r, l) = if noise.is_silent() {
                (r, l)
            } else {
                inject_noise_with(&r, &l, noise, &mut rng)?
            };
            let (mut value, e) = extract_weak_value(&r, &l, self.zeta, phi0);
            clamped += e.clamped.iter().filter(|&&c| c).count();
            undefined += e.undefined.iter().filter(|&&u| u).count();
            let mut axis: Vec<f64> = camera.axis.iter().map(|x| x / self.scale).collect();
            let mut counts: Vec<f64> = r.iter().zip(&l).map(|(a, b)| (a + b) * self.scale.abs()).collect();
            let mut extra: Vec<bool> = e.clamped.iter().zip(&e.undefined).map(|(c, u)| c | u).collect();
            if self.scale < 0.0 {
                axis.reverse();
                value.reverse();
                counts.reverse();
                extra.reverse();
            }
            let mut p = WeakValueProfile::ideal(self.axis_label, self.value_label, axis, value, counts);
            for (f, x) in p.flagged.iter_mut().zip(extra) {
                *f |= x;
            }
            per_tilt.push(p);
        }
        let profile = tilt_average(&per_tilt)?;
        let weak_parameter = self.zeta * weak_extent(&profile);
        if weak_parameter > WEAK_LIMIT {
            log::warn!(
                "coupling is outside the weak regime: zeta * max|weak value| = {weak_parameter:.3} > {WEAK_LIMIT}"
            );
        }
        Ok(PipelineReport {
            profile,
            per_tilt,
            clamped,
            undefined,
            weak_parameter,
        })
    }
}

fn weak_extent(profile: &WeakValueProfile) -> f64 {
    let peak = profile.counts.iter().copied().fold(0.0, f64::max);
    profile
        .value
        .iter()
        .zip(&profile.counts)
        .filter(|(v, &c)| c >= WEAK_LIMIT_SUPPORT * peak && v.is_finite())
        .fold(0.0, |m, (v, _)| m.max(v.abs()))
}

fn transform_with(m: RayMatrix, k: f64) -> impl Fn(&WavefieldGrid) -> Result<WavefieldGrid> {
    move |f| apply_ray_matrix(f, &m, k)
}

/// Weak transverse-momentum measurement followed by strong position
/// post-selection on the effective plane `z`, which the relay images onto
/// the camera. Values are angles against effective-plane position.
pub fn simulate_xbohm_pipeline(
    scene: &SlitScene,
    lenses: &LensSystem,
    z: f64,
    cfg: &CalciteConfig,
    noise: &NoiseModel,
) -> Result<PipelineReport> {
    cfg.validate()?;
    lenses.validate()?;
    if cfg.coupled_observable != CoupledObservable::TransverseMomentum {
        return Err(Error::config("the x-Bohm pipeline couples transverse momentum"));
    }
    let k = scene.wavenumber();
    let spectral = scene.spectral();
    let field = FreeEvolution::new(scene)?.field(z)?;
    // momentum coupling commutes with free propagation, so coupling at the
    // slits and at `z` are the same operation
    let pointer = prepare_diagonal(&momentum_rep_with(&field, k, &spectral)?);
    let system = lenses.xbohm_system(z)?;
    let to_camera = transform_with(system, k);
    Readout {
        axis_label: "x [m]",
        value_label: "theta_w [rad]",
        zeta: cfg.zeta,
        scale: system.a,
    }
    .run(cfg, noise, |phi0| {
        apply_calcite_exact(&pointer, cfg, phi0)?
            .map_components(|c| position_rep_with(c, k, &spectral))?
            .map_components(&to_camera)
    })
}

/// Weak effective-position measurement at plane `z` followed by strong
/// momentum post-selection. The calcite strength is converted to the
/// position coupling `ζ f1/(f2 (f1 + z))` of the relay. Values are
/// positions against angle.
pub fn simulate_pbohm_pipeline(
    scene: &SlitScene,
    lenses: &LensSystem,
    z: f64,
    cfg: &CalciteConfig,
    noise: &NoiseModel,
) -> Result<PipelineReport> {
    cfg.validate()?;
    lenses.validate()?;
    if cfg.coupled_observable != CoupledObservable::EffectivePosition {
        return Err(Error::config("the p-Bohm pipeline couples effective position"));
    }
    let k = scene.wavenumber();
    let effective = CalciteConfig {
        zeta: lenses.position_coupling_strength(cfg.zeta, z)?,
        ..cfg.clone()
    };
    let field = FreeEvolution::new(scene)?.field(z)?;
    let pointer = prepare_diagonal(&field);
    let system = lenses.pbohm_system(z);
    let to_camera = transform_with(system, k);
    Readout {
        axis_label: "theta [rad]",
        value_label: "x_w [m]",
        zeta: effective.zeta,
        scale: system.b,
    }
    .run(&effective, noise, |phi0| {
        apply_calcite_exact(&pointer, &effective, phi0)?.map_components(&to_camera)
    })
}
