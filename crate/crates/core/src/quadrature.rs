//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! Every component shares the same subdivision; the error estimate of an
//! interval is the largest |K15 − G7| over its components, so the reported
//! total bounds the error of each component separately.

use crate::{Error, Result};

// QUADPACK nodes and weights, quoted at full published precision

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
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    /// Refinement stops once the total error estimate drops below this.
    pub target: f64,
    /// The result is rejected if the final estimate is above this.
    pub reject: f64,
    pub max_intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: f64,
}

fn gk15<F: Fn(f64, &mut [f64])>(f: &F, a: f64, b: f64, width: usize, buf: &mut [f64]) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; width];
    let mut gauss = vec![0.0; width];
    let mut add = |x: f64, wk: f64, wg: f64, buf: &mut [f64]| {
        f(x, buf);
        for c in 0..width {
            kron[c] += wk * buf[c];
            gauss[c] += wg * buf[c];
        }
    };
    add(center, WGK[7], WG[3], buf);
    for k in 0..7 {
        let wg = if k % 2 == 1 { WG[k / 2] } else { 0.0 };
        let dx = half * XGK[k];
        add(center - dx, WGK[k], wg, buf);
        add(center + dx, WGK[k], wg, buf);
    }
    let mut err = 0.0f64;
    for c in 0..width {
        kron[c] *= half;
        gauss[c] *= half;
        err = err.max((kron[c] - gauss[c]).abs());
    }
    Segment {
        a,
        b,
        value: kron,
        err,
    }
}

/// Integrates `f` over `[a, b]`, starting from `pieces` equal subintervals.
pub(crate) fn integrate<F>(
    f: F,
    a: f64,
    b: f64,
    width: usize,
    pieces: usize,
    tol: Tolerance,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [f64]),
{
    let mut buf = vec![0.0; width];
    if b <= a {
        return Ok(vec![0.0; width]);
    }
    let pieces = pieces.max(1);
    let step = (b - a) / pieces as f64;
    let mut segments: Vec<Segment> = (0..pieces)
        .map(|k| {
            let lo = a + step * k as f64;
            let hi = if k + 1 == pieces { b } else { lo + step };
            gk15(&f, lo, hi, width, &mut buf)
        })
        .collect();

    let total = |s: &[Segment]| s.iter().map(|x| x.err).sum::<f64>();
    while total(&segments) > tol.target && segments.len() < tol.max_intervals {
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("nonempty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            segments.push(seg);
            break;
        }
        segments.push(gk15(&f, seg.a, mid, width, &mut buf));
        segments.push(gk15(&f, mid, seg.b, width, &mut buf));
    }

    let err = total(&segments);
    // NaN errors fail too
    if err.is_nan() || err > tol.reject {
        return Err(Error::QuadratureFailure(err));
    }
    // Sum in interval order so the result does not depend on refinement history.
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut out = vec![0.0; width];
    for s in &segments {
        for (o, v) in out.iter_mut().zip(&s.value) {
            *o += v;
        }
    }
    Ok(out)
}
