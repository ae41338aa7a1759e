//! Bohmian trajectories through full-loop Stern-Gerlach devices.
//!
//! A full-loop device (FULO) splits a spin-carrying wave packet along its
//! axis and re-merges it: the identity on the quantum state, but the spin
//! information is transferred to which arm the guided particle rides. The
//! packet pair is modeled with frozen-width Gaussians and piecewise-linear
//! centers `z_up(t) = v * min(t, 2*T_half - t)`, `z_dn = -z_up`; the two
//! arms carry orthogonal spin components, so the guidance velocity is the
//! density-weighted average of the two center velocities with no
//! interference term. One spatial dimension means trajectories cannot
//! cross, so the top `p_up` fraction of the initial Gaussian mass flows
//! into the up arm; the quantile of the initial position is the particle's
//! deterministic hidden coordinate.
//!
//! The arm read at maximum separation implies a spin value for the device
//! axis. Repeating a device reproduces the arm, but a device flipped by 180
//! degrees can invert the implied value even though the quantum state never
//! changed; [`hv_stability_report`] flags exactly that instability.

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::quantum::{INGEST_NORM_MIN, STATE_TOL};
use crate::sign::Sign;

pub use crate::quantum::Axis;

/// Default packet-center speed.
pub const DEFAULT_SPLIT_SPEED: f64 = 1.0;
/// Default time to maximum separation.
pub const DEFAULT_HALF_DURATION: f64 = 8.0;
/// Default Gaussian packet width.
pub const DEFAULT_PACKET_WIDTH: f64 = 1.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A normalized single-particle spin state over `(|a>, |b>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState2 {
    amps: [Complex64; 2],
}

impl SpinState2 {
    pub fn new(amps: [Complex64; 2]) -> Result<Self> {
        let norm = norm2(&amps);
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(SpinState2 { amps })
    }

    pub fn from_components(amps: [Complex64; 2]) -> Result<Self> {
        let norm = norm2(&amps);
        if norm < INGEST_NORM_MIN {
            return Err(Error::NormTooSmall { norm });
        }
        Ok(SpinState2 {
            amps: [amps[0] / norm, amps[1] / norm],
        })
    }

    /// `|a>`: the +1 eigenstate of sigma_x.
    pub fn a() -> Self {
        SpinState2 { amps: [ONE, ZERO] }
    }

    /// `|b>`: the -1 eigenstate of sigma_x.
    pub fn b() -> Self {
        SpinState2 { amps: [ZERO, ONE] }
    }

    /// `|+> = (|a> + |b>)/sqrt(2)`: the +1 eigenstate of sigma_y.
    pub fn plus_y() -> Self {
        let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
        SpinState2 { amps: [c, c] }
    }

    /// `|-> = (|a> - |b>)/sqrt(2)`: the -1 eigenstate of sigma_y.
    pub fn minus_y() -> Self {
        let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
        SpinState2 { amps: [c, -c] }
    }

    /// The eigenstate of `sigma_axis` with the given eigenvalue.
    pub fn eigenstate(axis: Axis, eigenvalue: Sign) -> Self {
        let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match (axis, eigenvalue) {
            (Axis::X, Sign::Plus) => SpinState2::a(),
            (Axis::X, Sign::Minus) => SpinState2::b(),
            (Axis::Y, Sign::Plus) => SpinState2::plus_y(),
            (Axis::Y, Sign::Minus) => SpinState2::minus_y(),
            (Axis::Z, Sign::Plus) => SpinState2 { amps: [c, c * i] },
            (Axis::Z, Sign::Minus) => SpinState2 { amps: [c, -c * i] },
        }
    }

    pub fn amplitudes(&self) -> &[Complex64; 2] {
        &self.amps
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &SpinState2) -> Complex64 {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }
}

impl Serialize for SpinState2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: [[f64; 2]; 2] = std::array::from_fn(|k| [self.amps[k].re, self.amps[k].im]);
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpinState2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = <[[f64; 2]; 2]>::deserialize(deserializer)?;
        let amps = std::array::from_fn(|k| Complex64::new(pairs[k][0], pairs[k][1]));
        SpinState2::new(amps).map_err(de::Error::custom)
    }
}

fn norm2(amps: &[Complex64; 2]) -> f64 {
    (amps[0].norm_sqr() + amps[1].norm_sqr()).sqrt()
}

/// A full-loop Stern-Gerlach device specification.
///
/// `orientation` -1 is the spatially flipped device: it routes the -1
/// eigenstate of the axis up. The kinematics must keep the arms well
/// separated at mid-time: `split_speed * half_duration >= 6 * packet_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuloDevice {
    pub axis: Axis,
    pub orientation: Sign,
    pub split_speed: f64,
    pub half_duration: f64,
    pub packet_width: f64,
}

impl FuloDevice {
    pub fn new(
        axis: Axis,
        orientation: Sign,
        split_speed: f64,
        half_duration: f64,
        packet_width: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("split_speed", split_speed),
            ("half_duration", half_duration),
            ("packet_width", packet_width),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::DeviceGeometry(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if split_speed * half_duration < 6.0 * packet_width {
            return Err(Error::DeviceGeometry(format!(
                "arms not separated: split_speed * half_duration = {} < 6 * packet_width = {}",
                split_speed * half_duration,
                6.0 * packet_width
            )));
        }
        Ok(FuloDevice {
            axis,
            orientation,
            split_speed,
            half_duration,
            packet_width,
        })
    }

    /// A device along `axis` with the default kinematics.
    pub fn along(axis: Axis, orientation: Sign) -> Self {
        FuloDevice::new(
            axis,
            orientation,
            DEFAULT_SPLIT_SPEED,
            DEFAULT_HALF_DURATION,
            DEFAULT_PACKET_WIDTH,
        )
        .expect("default kinematics are valid")
    }

    pub fn total_duration(&self) -> f64 {
        2.0 * self.half_duration
    }
}

impl std::fmt::Display for FuloDevice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.orientation == Sign::Plus { '+' } else { '-' };
        write!(f, "{sign}{}", self.axis.name())
    }
}

/// Weight on the spatially-up arm and the eigenvalue routed up.
pub fn device_weights(spin: &SpinState2, device: &FuloDevice) -> (f64, Sign) {
    let up_state = SpinState2::eigenstate(device.axis, device.orientation);
    let p_up = up_state.inner(spin).norm_sqr();
    (p_up.clamp(0.0, 1.0), device.orientation)
}

/// The spatial model of one device pass: two frozen-width Gaussian packets
/// with probability weight `p_up` on the up arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketPairModel {
    pub p_up: f64,
    pub split_speed: f64,
    pub half_duration: f64,
    pub packet_width: f64,
}

impl PacketPairModel {
    pub fn new(
        p_up: f64,
        split_speed: f64,
        half_duration: f64,
        packet_width: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_up) || !p_up.is_finite() {
            return Err(Error::ParameterRange {
                name: "p_up",
                value: p_up,
                requirement: "must lie in [0, 1]",
            });
        }
        // Reuse the device geometry checks.
        let probe = FuloDevice::new(Axis::X, Sign::Plus, split_speed, half_duration, packet_width)?;
        Ok(PacketPairModel {
            p_up,
            split_speed: probe.split_speed,
            half_duration: probe.half_duration,
            packet_width: probe.packet_width,
        })
    }

    /// Model of `device` acting on `spin`.
    pub fn for_device(spin: &SpinState2, device: &FuloDevice) -> Self {
        let (p_up, _) = device_weights(spin, device);
        PacketPairModel {
            p_up,
            split_speed: device.split_speed,
            half_duration: device.half_duration,
            packet_width: device.packet_width,
        }
    }

    pub fn total_duration(&self) -> f64 {
        2.0 * self.half_duration
    }

    /// Up-packet center: out at `split_speed`, back after `half_duration`.
    pub fn center_up(&self, t: f64) -> f64 {
        self.split_speed * t.min(self.total_duration() - t)
    }

    fn center_up_dot(&self, t: f64) -> f64 {
        if t < self.half_duration {
            self.split_speed
        } else {
            -self.split_speed
        }
    }

    /// Guidance velocity at `(z, t)`: the Gaussian-density-weighted average
    /// of the two packet-center velocities.
    ///
    /// When both densities underflow (below 1e-300) the nearer packet's
    /// center velocity is returned.
    pub fn velocity(&self, z: f64, t: f64) -> f64 {
        let v_up = self.center_up_dot(t);
        let v_dn = -v_up;
        if self.p_up >= 1.0 {
            return v_up;
        }
        if self.p_up <= 0.0 {
            return v_dn;
        }
        let c_up = self.center_up(t);
        let c_dn = -c_up;
        let two_s2 = 2.0 * self.packet_width * self.packet_width;
        let e_up = -(z - c_up) * (z - c_up) / two_s2;
        let e_dn = -(z - c_dn) * (z - c_dn) / two_s2;

        let log_norm = (self.packet_width * (2.0 * std::f64::consts::PI).sqrt()).ln();
        let log_min = 1e-300f64.ln();
        if e_up - log_norm < log_min && e_dn - log_norm < log_min {
            return if (z - c_up).abs() <= (z - c_dn).abs() {
                v_up
            } else {
                v_dn
            };
        }

        let shift = e_up.max(e_dn);
        let w_up = self.p_up * (e_up - shift).exp();
        let w_dn = (1.0 - self.p_up) * (e_dn - shift).exp();
        (w_up * v_up + w_dn * v_dn) / (w_up + w_dn)
    }
}

/// Which arm the particle occupies at maximum separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Up,
    Down,
}

impl Arm {
    pub fn sign(self) -> Sign {
        match self {
            Arm::Up => Sign::Plus,
            Arm::Down => Sign::Minus,
        }
    }
}

/// Quantile of an initial position under the width-`sigma` packet at 0.
pub fn quantile_of_position(z0: f64, sigma: f64) -> f64 {
    std_normal().cdf(z0 / sigma)
}

/// Initial position at a given quantile of the initial packet.
pub fn position_of_quantile(q: f64, sigma: f64) -> f64 {
    sigma * std_normal().inverse_cdf(q)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Discrete arm rule: trajectories cannot cross, so the topmost `p_up`
/// probability mass flows up. The tie `q = 1 - p_up` resolves to down.
pub fn arm_by_quantile(q: f64, p_up: f64) -> Arm {
    debug_assert!(q > 0.0 && q < 1.0, "quantile must lie in (0, 1)");
    debug_assert!((0.0..=1.0).contains(&p_up));
    if q > 1.0 - p_up {
        Arm::Up
    } else {
        Arm::Down
    }
}

/// One integrated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub model: PacketPairModel,
    pub dt: f64,
    pub z0: f64,
    /// Quantile of `z0` under the initial packet.
    pub q: f64,
    /// Arm read at `t = half_duration` (maximum separation).
    pub arm: Arm,
    /// `(t, z)` samples at every accepted step, strictly increasing in `t`.
    pub samples: Vec<(f64, f64)>,
}

impl TrajectoryRecord {
    pub fn final_position(&self) -> f64 {
        self.samples.last().expect("at least the initial sample").1
    }

    /// CSV with header `t,z` and 12-significant-digit values; byte-stable
    /// across runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,z\n");
        for &(t, z) in &self.samples {
            out.push_str(&format!("{t:.11e},{z:.11e}\n"));
        }
        out
    }
}

/// Fixed-step fourth-order Runge-Kutta integration of the guidance
/// equation `dz/dt = velocity(z, t)` over one full device pass.
///
/// `dt` must not exceed `half_duration / 1000`; the actual step is trimmed
/// so that the grid lands exactly on the mid-time readout and the end time.
pub fn integrate_trajectory(
    model: &PacketPairModel,
    z0: f64,
    dt: f64,
) -> Result<TrajectoryRecord> {
    let max_dt = model.half_duration / 1000.0;
    if dt <= 0.0 || dt.is_nan() || dt > max_dt {
        return Err(Error::StepTooLarge { dt, max: max_dt });
    }
    let t_end = model.total_duration();
    let mut steps = (t_end / dt).ceil() as usize;
    if steps % 2 == 1 {
        steps += 1;
    }
    let h = t_end / steps as f64;

    let mut samples = Vec::with_capacity(steps + 1);
    let mut z = z0;
    samples.push((0.0, z));
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = model.velocity(z, t);
        let k2 = model.velocity(z + 0.5 * h * k1, t + 0.5 * h);
        let k3 = model.velocity(z + 0.5 * h * k2, t + 0.5 * h);
        let k4 = model.velocity(z + h * k3, t + h);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        samples.push(((k + 1) as f64 * h, z));
    }

    let mid = samples[steps / 2].1;
    Ok(TrajectoryRecord {
        model: *model,
        dt: h,
        z0,
        q: quantile_of_position(z0, model.packet_width),
        arm: if mid > 0.0 { Arm::Up } else { Arm::Down },
        samples,
    })
}

/// Integrate a grid of initial positions; parallel when the `parallel`
/// feature is enabled, with output order matching `z0s` either way.
pub fn integrate_grid(
    model: &PacketPairModel,
    z0s: &[f64],
    dt: f64,
) -> Result<Vec<TrajectoryRecord>> {
    crate::par::map_collect(z0s, |&z0| integrate_trajectory(model, z0, dt))
        .into_iter()
        .collect()
}

/// Sequential twin of [`integrate_grid`]; used by the benchmark suite.
pub fn integrate_grid_seq(
    model: &PacketPairModel,
    z0s: &[f64],
    dt: f64,
) -> Result<Vec<TrajectoryRecord>> {
    crate::par::map_collect_seq(z0s, |&z0| integrate_trajectory(model, z0, dt))
        .into_iter()
        .collect()
}

/// One device pass within a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceStep {
    pub device: FuloDevice,
    pub p_up: f64,
    /// Eigenvalue routed to the up arm by this device.
    pub up_label: Sign,
    pub arm: Arm,
    /// Spin value for the device axis implied by the observed arm.
    pub implied_value: Sign,
}

/// Record of a particle carried through a list of devices.
///
/// Each device is the identity on the spin state, and the model's in/out
/// map on the particle coordinate is the identity as well, so the quantile
/// persists across devices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub spin_in: SpinState2,
    pub q: f64,
    pub steps: Vec<SequenceStep>,
    pub spin_out: SpinState2,
}

/// Carry a particle with hidden coordinate `q` through `devices` in order,
/// reading the arm (and the implied spin value) inside each.
pub fn run_fulo_sequence(spin: &SpinState2, q: f64, devices: &[FuloDevice]) -> SequenceRecord {
    assert!(q > 0.0 && q < 1.0, "quantile must lie in (0, 1)");
    let mut steps = Vec::with_capacity(devices.len());
    for device in devices {
        let (p_up, up_label) = device_weights(spin, device);
        let arm = arm_by_quantile(q, p_up);
        let implied_value = arm.sign() * device.orientation;
        steps.push(SequenceStep {
            device: *device,
            p_up,
            up_label,
            arm,
            implied_value,
        });
    }
    SequenceRecord {
        spin_in: *spin,
        q,
        steps,
        spin_out: *spin,
    }
}

/// Implied spin values for one axis across a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisStability {
    pub axis: Axis,
    /// Implied values in sequence order.
    pub values: Vec<Sign>,
    pub stable: bool,
}

/// Stability verdict over a device sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub sequence: SequenceRecord,
    pub axes: Vec<AxisStability>,
    pub unstable_axes: Vec<Axis>,
    /// The signaling protocol presumes spin hidden values survive identity
    /// transformations; false as soon as any axis is unstable.
    pub protocol_premise_holds: bool,
    pub explanation: String,
}

/// Group a sequence's implied values by axis and flag every axis whose
/// value changes, even though each device is an identity on the state.
pub fn hv_stability_report(spin: &SpinState2, q: f64, devices: &[FuloDevice]) -> StabilityReport {
    let sequence = run_fulo_sequence(spin, q, devices);
    let mut axes = Vec::new();
    for axis in Axis::ALL {
        let values: Vec<Sign> = sequence
            .steps
            .iter()
            .filter(|s| s.device.axis == axis)
            .map(|s| s.implied_value)
            .collect();
        if values.is_empty() {
            continue;
        }
        let stable = values.windows(2).all(|w| w[0] == w[1]);
        axes.push(AxisStability {
            axis,
            values,
            stable,
        });
    }
    let unstable_axes: Vec<Axis> = axes
        .iter()
        .filter(|a| !a.stable)
        .map(|a| a.axis)
        .collect();
    let protocol_premise_holds = unstable_axes.is_empty();
    let explanation = if protocol_premise_holds {
        "every axis kept its implied spin value across the sequence".to_string()
    } else {
        let names: Vec<&str> = unstable_axes.iter().map(|a| a.name()).collect();
        format!(
            "implied spin value changed for axis {} although each device acts as the \
             identity on the quantum state; the bit-signaling protocol premise of \
             stable spin hidden values fails",
            names.join(", ")
        )
    };
    StabilityReport {
        sequence,
        axes,
        unstable_axes,
        protocol_premise_holds,
        explanation,
    }
}
