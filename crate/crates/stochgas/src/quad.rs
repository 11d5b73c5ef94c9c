//! Adaptive Gauss–Kronrod quadrature over unions of intervals.
//!
//! The integrand is vector-valued so that coupled moments (mass, momentum,
//! pressure) share one subdivision tree and one weight normalization.
//! Refinement is worst-interval-first with a deterministic tie-break, and
//! the final sum runs over intervals sorted by position, so results do not
//! depend on allocator or scheduling accidents.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

// 21-point Kronrod nodes and the embedded 10-point Gauss weights (QUADPACK).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Error targets and the refinement cap for one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadTolerance<T> {
    pub rel: T,
    pub abs: T,
    pub max_subdivisions: usize,
}

/// Integral value and achieved error bound, per integrand component.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadOutcome<T, const N: usize> {
    pub value: [T; N],
    pub error: [T; N],
}

struct Rule<T> {
    xgk: [T; 11],
    wg: [T; 5],
    wgk: [T; 11],
}

impl<T: Real> Rule<T> {
    fn new() -> Self {
        let mut xgk = [T::zero(); 11];
        let mut wg = [T::zero(); 5];
        let mut wgk = [T::zero(); 11];
        for (dst, src) in xgk.iter_mut().zip(XGK) {
            *dst = T::of(src);
        }
        for (dst, src) in wg.iter_mut().zip(WG) {
            *dst = T::of(src);
        }
        for (dst, src) in wgk.iter_mut().zip(WGK) {
            *dst = T::of(src);
        }
        Rule { xgk, wg, wgk }
    }

    /// One GK21 pass over [a, b]; returns (kronrod value, error bound).
    fn apply<const N: usize>(
        &self,
        f: &mut dyn FnMut(T) -> [T; N],
        a: T,
        b: T,
    ) -> Result<([T; N], [T; N])> {
        let half = T::of(0.5);
        let center = half * (a + b);
        let half_len = half * (b - a);
        let abs_half_len = half_len.abs();

        let f_center = f(center);
        let mut kronrod = [T::zero(); N];
        let mut gauss = [T::zero(); N];
        let mut res_abs = [T::zero(); N];
        for k in 0..N {
            kronrod[k] = f_center[k] * self.wgk[10];
            res_abs[k] = kronrod[k].abs();
        }

        // 20 symmetric nodes; odd Kronrod indices carry the Gauss rule.
        let mut fv1 = [[T::zero(); N]; 10];
        let mut fv2 = [[T::zero(); N]; 10];
        for j in 0..10 {
            let abscissa = half_len * self.xgk[j];
            let v1 = f(center - abscissa);
            let v2 = f(center + abscissa);
            fv1[j] = v1;
            fv2[j] = v2;
            for k in 0..N {
                let fsum = v1[k] + v2[k];
                kronrod[k] = kronrod[k] + self.wgk[j] * fsum;
                res_abs[k] = res_abs[k] + self.wgk[j] * (v1[k].abs() + v2[k].abs());
                if j % 2 == 1 {
                    gauss[k] = gauss[k] + self.wg[j / 2] * fsum;
                }
            }
        }

        let mut value = [T::zero(); N];
        let mut error = [T::zero(); N];
        for k in 0..N {
            let mean = kronrod[k] * half;
            let mut res_asc = self.wgk[10] * (f_center[k] - mean).abs();
            for j in 0..10 {
                res_asc = res_asc
                    + self.wgk[j] * ((fv1[j][k] - mean).abs() + (fv2[j][k] - mean).abs());
            }
            let raw_err = ((kronrod[k] - gauss[k]) * half_len).abs();
            value[k] = kronrod[k] * half_len;
            error[k] = rescale_error(raw_err, res_abs[k] * abs_half_len, res_asc * abs_half_len);
            if !value[k].is_finite() {
                return Err(Error::Domain(format!(
                    "non-finite integrand on [{}, {}]",
                    a.as_f64(),
                    b.as_f64()
                )));
            }
        }
        Ok((value, error))
    }
}

/// QUADPACK error heuristic: inflate the raw |K - G| difference toward the
/// scale of the integrand's variation and the rounding floor.
fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut scaled = err.abs();
    if res_asc != T::zero() && scaled != T::zero() {
        let ratio = (T::of(200.0) * scaled / res_asc).powf(T::of(1.5));
        scaled = if ratio < T::one() { res_asc * ratio } else { res_asc };
    }
    let tiny = T::min_positive_value() / (T::of(50.0) * T::epsilon());
    if res_abs > tiny {
        let min_err = T::of(50.0) * T::epsilon() * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

struct Interval<T, const N: usize> {
    a: T,
    b: T,
    value: [T; N],
    error: [T; N],
    seq: u64,
}

impl<T: Real, const N: usize> Interval<T, N> {
    fn key(&self) -> T {
        let mut worst = T::zero();
        for e in self.error {
            if e > worst {
                worst = e;
            }
        }
        worst
    }
}

impl<T: Real, const N: usize> PartialEq for Interval<T, N> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<T: Real, const N: usize> Eq for Interval<T, N> {}
impl<T: Real, const N: usize> PartialOrd for Interval<T, N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real, const N: usize> Ord for Interval<T, N> {
    fn cmp(&self, other: &Self) -> Ordering {
        // keys are finite by construction; older intervals win ties
        self.key()
            .partial_cmp(&other.key())
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Adaptively integrate `f` over a union of disjoint intervals.
///
/// Converged when, for every component, the summed error bound is below
/// `max(abs, rel * |value|)`. Exhausting the subdivision budget yields a
/// tolerance error carrying the achieved bound.
pub(crate) fn integrate<T: Real, const N: usize>(
    mut f: impl FnMut(T) -> [T; N],
    segments: &[(T, T)],
    tol: &QuadTolerance<T>,
) -> Result<QuadOutcome<T, N>> {
    let rule = Rule::new();
    let mut seq = 0u64;
    let mut active: BinaryHeap<Interval<T, N>> = BinaryHeap::new();
    let mut finished: Vec<Interval<T, N>> = Vec::new();

    for &(a, b) in segments {
        if !(b > a) {
            continue;
        }
        let (value, error) = rule.apply(&mut f, a, b)?;
        active.push(Interval { a, b, value, error, seq });
        seq += 1;
    }
    if active.is_empty() {
        return Ok(QuadOutcome { value: [T::zero(); N], error: [T::zero(); N] });
    }

    let mut subdivisions = 0usize;
    loop {
        let (total, err) = totals(&active, &finished);
        if converged::<T, N>(&total, &err, tol) {
            return Ok(finalize(active, finished));
        }
        if subdivisions >= tol.max_subdivisions {
            return Err(tolerance_error::<T, N>(&total, &err, tol));
        }
        let worst = active.pop();
        let worst = match worst {
            Some(w) => w,
            None => return Err(tolerance_error::<T, N>(&total, &err, tol)),
        };
        let mid = T::of(0.5) * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // interval at machine resolution: its error is final
            finished.push(worst);
            continue;
        }
        let (lv, le) = rule.apply(&mut f, worst.a, mid)?;
        let (rv, re) = rule.apply(&mut f, mid, worst.b)?;
        active.push(Interval { a: worst.a, b: mid, value: lv, error: le, seq });
        seq += 1;
        active.push(Interval { a: mid, b: worst.b, value: rv, error: re, seq });
        seq += 1;
        subdivisions += 1;
    }
}

fn totals<T: Real, const N: usize>(
    active: &BinaryHeap<Interval<T, N>>,
    finished: &[Interval<T, N>],
) -> ([T; N], [T; N]) {
    let mut parts: Vec<&Interval<T, N>> = active.iter().chain(finished.iter()).collect();
    parts.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
    let mut value = [T::zero(); N];
    let mut error = [T::zero(); N];
    for part in parts {
        for k in 0..N {
            value[k] += part.value[k];
            error[k] += part.error[k];
        }
    }
    (value, error)
}

fn converged<T: Real, const N: usize>(value: &[T; N], error: &[T; N], tol: &QuadTolerance<T>) -> bool {
    (0..N).all(|k| error[k] <= tol.abs.max(tol.rel * value[k].abs()))
}

fn tolerance_error<T: Real, const N: usize>(
    value: &[T; N],
    error: &[T; N],
    tol: &QuadTolerance<T>,
) -> Error {
    let mut achieved = 0.0f64;
    let mut requested = f64::INFINITY;
    for k in 0..N {
        achieved = achieved.max(error[k].as_f64());
        requested = requested.min(tol.abs.max(tol.rel * value[k].abs()).as_f64());
    }
    Error::Tolerance { achieved, requested }
}

fn finalize<T: Real, const N: usize>(
    active: BinaryHeap<Interval<T, N>>,
    finished: Vec<Interval<T, N>>,
) -> QuadOutcome<T, N> {
    let mut parts: Vec<Interval<T, N>> = active.into_vec();
    parts.extend(finished);
    parts.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
    let mut value = [T::zero(); N];
    let mut error = [T::zero(); N];
    for part in &parts {
        for k in 0..N {
            value[k] += part.value[k];
            error[k] += part.error[k];
        }
    }
    QuadOutcome { value, error }
}
