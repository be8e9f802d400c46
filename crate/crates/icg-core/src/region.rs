//! Region modality: color statistics and correspondence lines in scale space.
//!
//! A correspondence line probes the image along the projected contour normal.
//! Pixels are pooled into segments of `s` pixels (sampled at unit steps along
//! the dominant axis, so one scale-space unit spans `s / n_bar` pixels along
//! the line). Segment posteriors come from foreground/background color
//! histograms; combining them with smoothed step functions yields a discrete
//! distribution over the contour distance, which the tracker differentiates.
//!
//! Layout of the scale space: the distribution is evaluated at 12 discrete
//! distances `d_s in {-5.5, ..., +5.5}` and each value multiplies 8 step
//! values at `x in {-3.5, ..., +3.5}`, so a line pools 12 + 8 - 1 = 19
//! segments whose centers sit at integer coordinates `r_s in {-9, ..., +9}`.
//! The sub-pixel offset `delta_r` anchors that grid to whole pixels.

use crate::geometry::{skew, CameraIntrinsics, Mat6, PoseSE3, PoseVariation, Vec2, Vec3, Vec6};
use crate::image::ColorImage;
use crate::viewpoint::ContourPoint;
use crate::{Error, Result};

/// Discrete contour distances per line.
pub const N_DISTANCES: usize = 12;
/// Precomputed smoothed-step values per distance.
pub const N_STEP_VALUES: usize = 8;
/// Segments pooled per line.
pub const N_SEGMENTS: usize = N_DISTANCES + N_STEP_VALUES - 1;

/// Histogram resolution: 16x16x16 RGB bins (top 4 bits per channel).
pub const HISTOGRAM_BINS: usize = 4096;

/// Added to every bin before normalization so posterior products never hit 0.
const BIN_FLOOR: f64 = 1e-9;

/// Pixels sampled per side of a line when updating histograms.
const HISTOGRAM_PIXELS: usize = 20;

/// Lines whose free lengths project below this many segments are rejected.
const MIN_FREE_SEGMENTS: f64 = 3.0;

/// Floor for the distribution variance in scale-space units squared.
const VARIANCE_FLOOR: f64 = 1e-3;

#[inline]
fn bin_index(rgb: [u8; 3]) -> usize {
    (((rgb[0] >> 4) as usize) << 8) | (((rgb[1] >> 4) as usize) << 4) | ((rgb[2] >> 4) as usize)
}

/// Normalized foreground/background color histograms.
#[derive(Debug, Clone)]
pub struct ColorHistogramPair {
    fg: Box<[f64; HISTOGRAM_BINS]>,
    bg: Box<[f64; HISTOGRAM_BINS]>,
    initialized: bool,
}

impl Default for ColorHistogramPair {
    fn default() -> Self {
        Self::new()
    }
}

impl ColorHistogramPair {
    /// Uniform histograms; posteriors are 0.5 everywhere until updated.
    pub fn new() -> Self {
        let uniform = 1.0 / HISTOGRAM_BINS as f64;
        Self {
            fg: Box::new([uniform; HISTOGRAM_BINS]),
            bg: Box::new([uniform; HISTOGRAM_BINS]),
            initialized: false,
        }
    }

    #[inline]
    pub fn prob_fg(&self, rgb: [u8; 3]) -> f64 {
        self.fg[bin_index(rgb)]
    }

    #[inline]
    pub fn prob_bg(&self, rgb: [u8; 3]) -> f64 {
        self.bg[bin_index(rgb)]
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    /// Back to the uninitialized uniform state (refinement rebuilds
    /// histograms from scratch at every iteration).
    pub fn reset(&mut self) {
        *self = Self::new();
    }

    pub fn sum_fg(&self) -> f64 {
        self.fg.iter().sum()
    }

    pub fn sum_bg(&self) -> f64 {
        self.bg.iter().sum()
    }
}

/// Sampling geometry of one line for histogram updates: center and unit
/// normal in pixels. Foreground pixels lie along `-normal`.
#[derive(Debug, Clone, Copy)]
pub struct HistogramLine {
    pub center: Vec2,
    pub normal: Vec2,
}

/// Builds per-frame histograms from the first 20 pixels on each side of every
/// line (starting one pixel off center) and blends them into `hist` with
/// learning rate `alpha`.
///
/// The first-ever update uses `alpha = 1` regardless of the argument. A frame
/// with no valid pixels leaves the histograms unchanged.
pub fn update_histograms(
    hist: &mut ColorHistogramPair,
    image: &ColorImage,
    lines: &[HistogramLine],
    alpha: f64,
) {
    let mut frame_fg = vec![0.0f64; HISTOGRAM_BINS];
    let mut frame_bg = vec![0.0f64; HISTOGRAM_BINS];
    let mut count_fg = 0u64;
    let mut count_bg = 0u64;

    for line in lines {
        let n_bar = line.normal.x.abs().max(line.normal.y.abs());
        if n_bar < 1e-12 {
            continue;
        }
        let step = line.normal / n_bar;
        for t in 1..=HISTOGRAM_PIXELS {
            // Foreground marches inward along -n, background outward along +n.
            let pf = line.center - step * t as f64;
            let (fx, fy) = (pf.x.floor() as i64, pf.y.floor() as i64);
            if image.contains(fx, fy) {
                frame_fg[bin_index(image.get(fx as u32, fy as u32))] += 1.0;
                count_fg += 1;
            }
            let pb = line.center + step * t as f64;
            let (bx, by) = (pb.x.floor() as i64, pb.y.floor() as i64);
            if image.contains(bx, by) {
                frame_bg[bin_index(image.get(bx as u32, by as u32))] += 1.0;
                count_bg += 1;
            }
        }
    }

    if count_fg == 0 || count_bg == 0 {
        return;
    }

    let alpha = if hist.initialized { alpha } else { 1.0 };
    if alpha == 0.0 {
        return;
    }
    blend(&mut hist.fg, &frame_fg, alpha);
    blend(&mut hist.bg, &frame_bg, alpha);
    hist.initialized = true;
}

fn blend(hist: &mut [f64; HISTOGRAM_BINS], frame_counts: &[f64], alpha: f64) {
    let total: f64 = frame_counts.iter().sum::<f64>() + BIN_FLOOR * HISTOGRAM_BINS as f64;
    for (h, &c) in hist.iter_mut().zip(frame_counts) {
        let frame = (c + BIN_FLOOR) / total;
        *h = (1.0 - alpha) * *h + alpha * frame;
    }
}

/// Precomputed smoothed step function values.
///
/// `h_f(x) = 1/2 - alpha_h * tanh(x / (2 s_h))` tabulated at the 8
/// half-integer abscissae; `h_b = 1 - h_f` by construction.
#[derive(Debug, Clone)]
pub struct StepFunctionTable {
    pub s_h: f64,
    pub alpha_h: f64,
    h_f: [f64; N_STEP_VALUES],
}

/// Tabulates the smoothed step functions.
pub fn step_values(s_h: f64, alpha_h: f64) -> Result<StepFunctionTable> {
    if s_h <= 0.0 {
        return Err(Error::InvalidParameter(format!("slope s_h must be positive, got {s_h}")));
    }
    if !(0.0..=0.5).contains(&alpha_h) {
        return Err(Error::InvalidParameter(format!(
            "amplitude alpha_h must lie in [0, 0.5], got {alpha_h}"
        )));
    }
    let mut h_f = [0.0; N_STEP_VALUES];
    for (k, h) in h_f.iter_mut().enumerate() {
        let x = k as f64 - (N_STEP_VALUES as f64 - 1.0) / 2.0;
        *h = 0.5 - alpha_h * (x / (2.0 * s_h)).tanh();
    }
    Ok(StepFunctionTable { s_h, alpha_h, h_f })
}

impl StepFunctionTable {
    #[inline]
    pub fn h_f(&self, k: usize) -> f64 {
        self.h_f[k]
    }

    #[inline]
    pub fn h_b(&self, k: usize) -> f64 {
        1.0 - self.h_f[k]
    }
}

/// A correspondence line with pooled segment posteriors and the distribution
/// over discrete contour distances.
#[derive(Debug, Clone)]
pub struct CorrespondenceLine {
    /// Projected contour point, pixels.
    pub center: Vec2,
    /// Unit 2D normal (foreground at -n, background at +n).
    pub normal: Vec2,
    /// Max-abs component of the normal.
    pub n_bar: f64,
    /// Signed offset (pixels along the normal) from `center` to the anchor of
    /// the scale-space grid, chosen so pixel samples land on whole pixels.
    pub delta_r: f64,
    /// Pixels per segment.
    pub scale: u32,
    /// Generating 3D contour point, model frame.
    pub model_point: Vec3,
    /// Per-segment (foreground, background) posteriors at `r_s = -9..=9`.
    pub segment_posteriors: [(f64, f64); N_SEGMENTS],
    /// Normalized distribution over `d_s in {-5.5, ..., +5.5}`.
    pub distribution: [f64; N_DISTANCES],
}

impl CorrespondenceLine {
    /// Dominant-axis step vector: advances one pixel column/row per step.
    #[inline]
    pub fn step(&self) -> Vec2 {
        self.normal / self.n_bar
    }

    /// Position of pixel sample `j` (0-based, `0 .. 19 * scale`).
    pub fn pixel_position(&self, j: usize) -> Vec2 {
        let total = (N_SEGMENTS * self.scale as usize) as f64;
        let half_span = (total - 1.0) / 2.0;
        let mid = self.center + self.step() * (self.delta_r * self.n_bar);
        mid + self.step() * (j as f64 - half_span)
    }

    /// Mean and variance of the distribution, variance clamped from below.
    pub fn distribution_stats(&self) -> (f64, f64) {
        let mut mean = 0.0;
        for (j, &p) in self.distribution.iter().enumerate() {
            mean += p * distance_value(j);
        }
        let mut var = 0.0;
        for (j, &p) in self.distribution.iter().enumerate() {
            var += p * (distance_value(j) - mean).powi(2);
        }
        (mean, var.max(VARIANCE_FLOOR))
    }
}

/// Scale-space distance of distribution slot `j`.
#[inline]
pub fn distance_value(j: usize) -> f64 {
    j as f64 - (N_DISTANCES as f64 - 1.0) / 2.0
}

/// Builds a correspondence line for a contour point at the given pose and
/// scale. Returns `None` when the line is rejected: degenerate projected
/// normal, free lengths under 3 segments, or pixels crossing the image border.
#[allow(clippy::too_many_arguments)]
pub fn build_line(
    cp: &ContourPoint,
    cam_from_model: &PoseSE3,
    intr: &CameraIntrinsics,
    image: &ColorImage,
    hist: &ColorHistogramPair,
    scale: u32,
    table: &StepFunctionTable,
) -> Option<CorrespondenceLine> {
    debug_assert!(scale >= 1);
    let cam_point = cam_from_model.transform_point(&cp.point);
    if cam_point.z <= 0.0 {
        return None;
    }
    let center = intr.project(&cam_point).ok()?;

    // 2D normal: image-plane direction of the 3D normal at this pose.
    let offset_point = cam_point + cam_from_model.rotate(&cp.normal) * 1e-3;
    if offset_point.z <= 0.0 {
        return None;
    }
    let projected = intr.project(&offset_point).ok()?;
    let normal_raw = projected - center;
    if normal_raw.norm() < 1e-9 {
        return None;
    }
    let normal = normal_raw.normalize();
    let n_bar = normal.x.abs().max(normal.y.abs());

    // Free lengths in segments at this scale; both sides need >= 3.
    let px_per_m = intr.focal_mean() / cam_point.z;
    let seg_per_m = px_per_m * n_bar / scale as f64;
    if cp.fg_free_len * seg_per_m < MIN_FREE_SEGMENTS
        || cp.bg_free_len * seg_per_m < MIN_FREE_SEGMENTS
    {
        return None;
    }

    // Anchor the pixel grid: shift the line along its direction so sample
    // positions land on pixel centers of the dominant axis.
    let step = normal / n_bar;
    let total = N_SEGMENTS * scale as usize;
    let half_span = (total as f64 - 1.0) / 2.0;
    let x_dominant = normal.x.abs() >= normal.y.abs();
    let start_ideal = center - step * half_span;
    let dom = |v: &Vec2| if x_dominant { v.x } else { v.y };
    let target = (dom(&start_ideal) - 0.5).round() + 0.5;
    let shift = (target - dom(&start_ideal)) * dom(&step).signum();
    let start = start_ideal + step * shift;
    // The scale-space anchor moves by the same sub-pixel amount.
    let delta_r = shift / n_bar;

    // Pool pixels into segments; any sample outside the image rejects the line.
    let mut posteriors = [(0.5, 0.5); N_SEGMENTS];
    for (seg_idx, posterior) in posteriors.iter_mut().enumerate() {
        let mut pf = 1.0;
        let mut pb = 1.0;
        for m in 0..scale as usize {
            let j = seg_idx * scale as usize + m;
            let p = start + step * j as f64;
            let (px, py) = (p.x.floor() as i64, p.y.floor() as i64);
            if !image.contains(px, py) {
                return None;
            }
            let rgb = image.get(px as u32, py as u32);
            pf *= hist.prob_fg(rgb);
            pb *= hist.prob_bg(rgb);
        }
        let sum = pf + pb;
        if sum > 0.0 {
            *posterior = (pf / sum, pb / sum);
        }
    }

    let distribution = line_distribution(&posteriors, table);
    Some(CorrespondenceLine {
        center,
        normal,
        n_bar,
        delta_r,
        scale,
        model_point: cp.point,
        segment_posteriors: posteriors,
        distribution,
    })
}

/// Distribution over the 12 discrete contour distances: for each `d_s`, the
/// product over the 8 step values of `h_f(x) p_sf(d_s + x) + h_b(x) p_sb(..)`,
/// normalized to sum 1. Falls back to uniform if everything underflows.
pub fn line_distribution(
    posteriors: &[(f64, f64); N_SEGMENTS],
    table: &StepFunctionTable,
) -> [f64; N_DISTANCES] {
    let mut dist = [0.0; N_DISTANCES];
    for (j, slot) in dist.iter_mut().enumerate() {
        let mut p = 1.0;
        for k in 0..N_STEP_VALUES {
            let (psf, psb) = posteriors[j + k];
            p *= table.h_f(k) * psf + table.h_b(k) * psb;
        }
        *slot = p;
    }
    let sum: f64 = dist.iter().sum();
    if sum <= 0.0 {
        return [1.0 / N_DISTANCES as f64; N_DISTANCES];
    }
    for v in &mut dist {
        *v /= sum;
    }
    dist
}

/// Scale-space distance from the variated contour point to the line center.
pub fn scaled_distance(
    line: &CorrespondenceLine,
    theta: &PoseVariation,
    cam_from_model: &PoseSE3,
    intr: &CameraIntrinsics,
) -> Result<f64> {
    let varied = crate::geometry::variate_point(theta, &line.model_point);
    let cam_point = cam_from_model.transform_point(&varied);
    let pixel = intr.project(&cam_point)?;
    Ok((line.normal.dot(&(pixel - line.center)) - line.delta_r) * line.n_bar / line.scale as f64)
}

/// Derivative flavor for the region modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizationMode {
    /// Normal approximation from the distribution mean and variance.
    Global,
    /// Log-ratio of the two discrete values bracketing the current distance.
    Local,
}

/// Gradient and Hessian contribution of one line at the current pose.
///
/// `None` if the contour point moved behind the camera. In local mode a
/// distance outside the discrete window clamps to the nearest bracket and
/// drops the Hessian contribution (low confidence).
pub fn region_grad_hess(
    line: &CorrespondenceLine,
    table: &StepFunctionTable,
    mode: OptimizationMode,
    sigma_r: f64,
    alpha_s: f64,
    cam_from_model: &PoseSE3,
    intr: &CameraIntrinsics,
) -> Option<(Vec6, Mat6)> {
    let cam_point = cam_from_model.transform_point(&line.model_point);
    if cam_point.z <= 0.0 {
        return None;
    }
    let pixel = intr.project(&cam_point).ok()?;
    let s = line.scale as f64;
    let d_s = (line.normal.dot(&(pixel - line.center)) - line.delta_r) * line.n_bar / s;

    let jac = distance_jacobian(line, &cam_point, cam_from_model, intr);
    let (mean, var) = line.distribution_stats();

    let mut hessian_valid = true;
    let dlnp_dd = match mode {
        OptimizationMode::Global => -(d_s - mean) / var,
        OptimizationMode::Local => {
            let half = (N_DISTANCES as f64 - 1.0) / 2.0;
            let lo_raw = (d_s + half).floor();
            if lo_raw < 0.0 || lo_raw > (N_DISTANCES - 2) as f64 {
                hessian_valid = false;
            }
            let lo = (lo_raw.max(0.0) as usize).min(N_DISTANCES - 2);
            let ratio = line.distribution[lo + 1] / line.distribution[lo];
            alpha_s / var * ratio.ln()
        }
    };

    let kappa = table.s_h * s * s / (sigma_r * sigma_r * line.n_bar * line.n_bar);
    let g = jac * (kappa * dlnp_dd);
    let h = if hessian_valid {
        (jac * jac.transpose()) * (-kappa / var)
    } else {
        Mat6::zeros()
    };
    Some((g, h))
}

/// `d d_s / d theta` at `theta = 0` for the current pose.
fn distance_jacobian(
    line: &CorrespondenceLine,
    cam_point: &Vec3,
    cam_from_model: &PoseSE3,
    intr: &CameraIntrinsics,
) -> Vec6 {
    let (x, y, z) = (cam_point.x, cam_point.y, cam_point.z);
    let s = line.scale as f64;
    let factor = line.n_bar / s / (z * z);
    let nf_x = line.normal.x * intr.fx;
    let nf_y = line.normal.y * intr.fy;
    // 1x3 derivative of d_s with respect to the camera-frame point.
    let dd_dxc = Vec3::new(nf_x * z, nf_y * z, -nf_x * x - nf_y * y) * factor;
    // 3x6 derivative of the camera-frame point with respect to theta.
    let mut dxc_dtheta = nalgebra::Matrix3x6::<f64>::zeros();
    dxc_dtheta
        .view_mut((0, 0), (3, 3))
        .copy_from(&(cam_from_model.rotation * (-skew(&line.model_point))));
    dxc_dtheta.view_mut((0, 3), (3, 3)).copy_from(&cam_from_model.rotation);
    (dd_dxc.transpose() * dxc_dtheta).transpose()
}

/// Natural log of the distribution value at a continuous distance, linearly
/// interpolated in log space between the discrete slots (clamped at the
/// window edges). This is the objective the local-mode derivatives follow.
pub fn log_distribution_interpolated(line: &CorrespondenceLine, d_s: f64) -> f64 {
    let half = (N_DISTANCES as f64 - 1.0) / 2.0;
    let pos = (d_s + half).clamp(0.0, (N_DISTANCES - 1) as f64);
    let lo = (pos.floor() as usize).min(N_DISTANCES - 2);
    let frac = pos - lo as f64;
    let log_lo = line.distribution[lo].ln();
    let log_hi = line.distribution[lo + 1].ln();
    log_lo + frac * (log_hi - log_lo)
}

/// Scaled log-normal surrogate around the line's fixed distribution stats;
/// the forward function the global-mode derivatives linearize.
pub fn log_normal_surrogate(
    line: &CorrespondenceLine,
    table: &StepFunctionTable,
    sigma_r: f64,
    theta: &PoseVariation,
    cam_from_model: &PoseSE3,
    intr: &CameraIntrinsics,
) -> Result<f64> {
    let d_s = scaled_distance(line, theta, cam_from_model, intr)?;
    let (mean, var) = line.distribution_stats();
    let s = line.scale as f64;
    let kappa = table.s_h * s * s / (sigma_r * sigma_r * line.n_bar * line.n_bar);
    Ok(kappa * (-0.5 * (d_s - mean).powi(2) / var))
}

/// Builds a synthetic line with randomized geometry and a smooth random
/// distribution; shared by unit tests and the acceptance suite.
pub fn random_line(
    rng: &mut crate::rng::SplitMix64,
    intr: &CameraIntrinsics,
    scale: u32,
) -> CorrespondenceLine {
    let model_point = Vec3::new(
        rng.range_f64(-0.05, 0.05),
        rng.range_f64(-0.05, 0.05),
        rng.range_f64(-0.05, 0.05),
    );
    let angle = rng.range_f64(0.0, std::f64::consts::TAU);
    let normal = Vec2::new(angle.cos(), angle.sin());
    let n_bar = normal.x.abs().max(normal.y.abs());

    let mut posteriors = [(0.5, 0.5); N_SEGMENTS];
    let transition = rng.range_f64(-4.0, 4.0);
    let softness = rng.range_f64(0.5, 2.0);
    for (i, p) in posteriors.iter_mut().enumerate() {
        let r_s = i as f64 - (N_SEGMENTS as f64 - 1.0) / 2.0;
        let pf = 1.0 / (1.0 + ((r_s - transition) / softness).exp());
        *p = (pf, 1.0 - pf);
    }
    let table = step_values(0.5, 0.43).expect("valid defaults");
    let distribution = line_distribution(&posteriors, &table);

    CorrespondenceLine {
        center: Vec2::new(
            rng.range_f64(100.0, intr.width as f64 - 100.0),
            rng.range_f64(100.0, intr.height as f64 - 100.0),
        ),
        normal,
        n_bar,
        delta_r: rng.range_f64(-0.5, 0.5) / n_bar,
        scale,
        model_point,
        segment_posteriors: posteriors,
        distribution,
    }
}
