//! Gauss–Hermite rules for Gaussian-weighted integrals and a globally
//! adaptive Gauss–Kronrod (G7/K15) integrator for everything else.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussHermite;

use crate::error::{Error, Result};

pub const HERMITE_NODES: usize = 200;
const HERMITE_CHECK_NODES: usize = 150;

fn hermite_rule(nodes: usize) -> &'static GaussHermite {
    static FULL: OnceLock<GaussHermite> = OnceLock::new();
    static CHECK: OnceLock<GaussHermite> = OnceLock::new();
    let build = |n: usize| GaussHermite::new(NonZeroUsize::new(n).expect("nonzero"));
    match nodes {
        HERMITE_NODES => FULL.get_or_init(|| build(HERMITE_NODES)),
        HERMITE_CHECK_NODES => CHECK.get_or_init(|| build(HERMITE_CHECK_NODES)),
        _ => unreachable!("only the cached rules are used"),
    }
}

fn hermite_expectation<F: Fn(f64) -> f64>(f: &F, sd: f64, nodes: usize) -> f64 {
    let scale = std::f64::consts::SQRT_2 * sd;
    hermite_rule(nodes).integrate(|x| f(scale * x)) / PI.sqrt()
}

/// E[f(b)] for b ~ N(0, sd²).
///
/// Uses the 200-node Gauss–Hermite rule, checked against a 150-node rule.
/// When the two disagree beyond `rel_tol` (integrand poles close to the real
/// axis relative to `sd`) the integral falls back to adaptive Gauss–Kronrod.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(f: F, sd: f64, rel_tol: f64) -> Result<f64> {
    if sd == 0.0 {
        return Ok(f(0.0));
    }
    let full = hermite_expectation(&f, sd, HERMITE_NODES);
    let check = hermite_expectation(&f, sd, HERMITE_CHECK_NODES);
    if (full - check).abs() <= rel_tol * full.abs() + 1e-15 {
        return Ok(full);
    }
    let half = gaussian_cutoff(sd);
    let weighted = |b: f64| f(b) * crate::pointer::normal_pdf(b, 0.0, sd);
    let breaks = uniform_breaks(-half, half, 64);
    integrate_adaptive(
        weighted,
        &breaks,
        Tolerance {
            abs: 1e-15,
            rel: rel_tol * 1e-2,
            max_intervals: 200_000,
        },
    )
    .map(|e| e.value)
}

/// Half-width beyond which a N(0, sd²) weight is below 1e-36 of its peak.
pub fn gaussian_cutoff(sd: f64) -> f64 {
    13.0 * sd
}

pub fn uniform_breaks(lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    crate::pointer::linspace(lo, hi, panels.max(1) + 1)
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-10,
            max_intervals: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over the span of `breaks`, starting from the given
/// partition and bisecting the panel with the largest error estimate until
/// the total error meets `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    if breaks.len() < 2 {
        return Err(Error::QuadratureFailure(
            "need at least two breakpoints".into(),
        ));
    }
    let mut heap: BinaryHeap<Panel> = breaks
        .windows(2)
        .map(|w| kronrod15(&f, w[0], w[1]))
        .collect();
    let totals = |heap: &BinaryHeap<Panel>| {
        // Fixed summation order so results do not depend on heap layout.
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        (
            panels.iter().map(|p| p.value).sum::<f64>(),
            panels.iter().map(|p| p.error).sum::<f64>(),
        )
    };
    let (mut value, mut error) = totals(&heap);
    let mut steps = 0usize;
    loop {
        if !value.is_finite() {
            return Err(Error::QuadratureFailure("non-finite integrand".into()));
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            (value, error) = totals(&heap);
            if error <= tol.abs.max(tol.rel * value.abs()) {
                return Ok(Estimate {
                    value,
                    error,
                    intervals: heap.len(),
                });
            }
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureFailure(format!(
                "error {error:e} above tolerance after {} intervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::QuadratureFailure("interval underflow".into()));
        }
        let left = kronrod15(&f, worst.lo, mid);
        let right = kronrod15(&f, mid, worst.hi);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        steps += 1;
        if steps.is_multiple_of(4096) {
            (value, error) = totals(&heap);
        }
    }
}
