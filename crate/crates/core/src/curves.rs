//! Parameter sweeps of the distortion functions and the canned figure
//! datasets, rendered as CSV.
//!
//! Numbers use Rust's shortest round-trip formatting; non-finite values are
//! written `inf`, `-inf` and `nan`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{ocsc_gaussian, GaussianSpec, RateBudget};
use crate::numerics::Bracket;
use crate::{kl, w2};

/// Which distortion function a curve evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    /// Output-constrained distortion with a prescribed Gaussian reconstruction.
    Ocsc,
    /// Bounds under KL perception.
    Kl,
    /// Bounds under squared-W2 perception.
    W2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVar {
    R,
    Rc,
    P,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::R => "R",
            SweepVar::Rc => "Rc",
            SweepVar::P => "P",
        }
    }
}

/// `count` equispaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    lo: f64,
    hi: f64,
    count: usize,
}

impl SweepRange {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid("count", format!("must be >= 2, got {count}")));
        }
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::invalid("range", format!("need 0 <= lo < hi < inf, got {lo}..{hi}")));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn values(&self) -> Vec<f64> {
        let b = Bracket::new(self.lo, self.hi).expect("validated range");
        (0..self.count).map(|i| b.abscissa(i, self.count)).collect()
    }
}

/// Values of the parameters that are not swept.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FixedParams {
    pub r: Option<f64>,
    pub rc: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRequest {
    kind: CurveKind,
    src: GaussianSpec,
    rec: Option<GaussianSpec>,
    sweep: SweepVar,
    range: SweepRange,
    fixed: FixedParams,
}

impl CurveRequest {
    /// `rec` is required for [`CurveKind::Ocsc`] and rejected otherwise. Every
    /// parameter the kind uses must be fixed except the swept one, which
    /// must not be.
    pub fn new(
        kind: CurveKind,
        src: GaussianSpec,
        rec: Option<GaussianSpec>,
        sweep: SweepVar,
        range: SweepRange,
        fixed: FixedParams,
    ) -> Result<Self> {
        let uses_p = kind != CurveKind::Ocsc;
        match (kind, rec.is_some()) {
            (CurveKind::Ocsc, false) => return Err(Error::invalid("rec", "required for ocsc curves")),
            (CurveKind::Kl | CurveKind::W2, true) => {
                return Err(Error::invalid("rec", "only ocsc curves take a reconstruction"))
            }
            _ => {}
        }
        if sweep == SweepVar::P && !uses_p {
            return Err(Error::invalid("sweep", "ocsc curves have no perception parameter"));
        }
        let slots = [(SweepVar::R, "r", fixed.r), (SweepVar::Rc, "rc", fixed.rc), (SweepVar::P, "p", fixed.p)];
        for (var, name, value) in slots {
            let wanted = var != sweep && (var != SweepVar::P || uses_p);
            match (wanted, value) {
                (true, None) => return Err(Error::invalid(name, "missing fixed value")),
                (false, Some(_)) if var == sweep => return Err(Error::invalid(name, "is the swept variable")),
                (false, Some(_)) => return Err(Error::invalid(name, "not used by ocsc curves")),
                (true, Some(v)) if v.is_nan() || v < 0.0 => {
                    return Err(Error::invalid(name, format!("must be >= 0 (inf allowed), got {v}")))
                }
                _ => {}
            }
        }
        Ok(Self { kind, src, rec, sweep, range, fixed })
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn sweep(&self) -> SweepVar {
        self.sweep
    }

    fn params_at(&self, v: f64) -> (f64, f64, f64) {
        let pick = |var, fixed: Option<f64>| if self.sweep == var { v } else { fixed.unwrap_or(0.0) };
        (pick(SweepVar::R, self.fixed.r), pick(SweepVar::Rc, self.fixed.rc), pick(SweepVar::P, self.fixed.p))
    }
}

/// One evaluated sweep point. For [`CurveKind::Ocsc`] the distortion is
/// exact, so `lower == upper` and `tight` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub tight: bool,
}

fn eval_point(kind: CurveKind, src: GaussianSpec, rec: Option<GaussianSpec>, r: f64, rc: f64, p: f64) -> Result<(f64, f64, bool)> {
    let rates = RateBudget::new(r, rc)?;
    match kind {
        CurveKind::Ocsc => {
            let rec = rec.ok_or_else(|| Error::invalid("rec", "required for ocsc curves"))?;
            let d = ocsc_gaussian(&src, &rec, rates);
            Ok((d, d, true))
        }
        CurveKind::Kl => {
            let b = kl::solve(&kl::KlProblem::new(src, rates, p)?)?;
            Ok((b.lower, b.upper, b.tight))
        }
        CurveKind::W2 => {
            let b = w2::solve(&w2::W2Problem::new(src, rates, p)?);
            Ok((b.lower, b.upper, b.tight))
        }
    }
}

/// Evaluates the request at every sweep value, in ascending order.
pub fn evaluate(req: &CurveRequest) -> Result<Vec<CurvePoint>> {
    req.range
        .values()
        .into_par_iter()
        .map(|v| {
            let (r, rc, p) = req.params_at(v);
            let (lower, upper, tight) = eval_point(req.kind, req.src, req.rec, r, rc, p)?;
            Ok(CurvePoint { value: v, lower, upper, tight })
        })
        .collect()
}

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x}")
    }
}

/// CSV for a single curve. Bound kinds use
/// `sweep_var,value,lower,upper,tight`; ocsc uses `sweep_var,value,distortion`.
pub fn curve_csv(req: &CurveRequest) -> Result<String> {
    let points = evaluate(req)?;
    let var = req.sweep.name();
    let mut out = String::new();
    if req.kind == CurveKind::Ocsc {
        out.push_str("sweep_var,value,distortion\n");
        for pt in &points {
            let _ = writeln!(out, "{var},{},{}", fmt_num(pt.value), fmt_num(pt.upper));
        }
    } else {
        out.push_str("sweep_var,value,lower,upper,tight\n");
        for pt in &points {
            let _ = writeln!(out, "{var},{},{},{},{}", fmt_num(pt.value), fmt_num(pt.lower), fmt_num(pt.upper), pt.tight);
        }
    }
    Ok(out)
}

/// The seven canned figure datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    /// Ocsc distortion for `N(0,1) -> N(1,4)` versus `R`, `Rc in {0, 1, inf}`.
    Fig3,
    /// KL bounds versus `R` at `Rc = 1`, `P = 1`.
    Fig4,
    /// KL bounds versus `P` at `R = 1`, `Rc = 1`.
    Fig5,
    /// Perfect realism (`P = 0`) versus `R`, `Rc in {0, 1, inf}`.
    Fig6,
    /// Unlimited common randomness versus `R`, KL `P in {0, 0.1, inf}`.
    Fig7,
    /// Unlimited common randomness versus KL `P`, `R in {0, 0.1, 0.5}`.
    Fig8,
    /// W2 bounds versus `R` at `Rc = 1`, `P = 1`, and versus `P` at `R = 1`, `Rc = 1`.
    Fig9,
}

impl FigureId {
    pub const ALL: [FigureId; 7] =
        [FigureId::Fig3, FigureId::Fig4, FigureId::Fig5, FigureId::Fig6, FigureId::Fig7, FigureId::Fig8, FigureId::Fig9];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

pub const FIGURE_POINTS: usize = 501;
pub const FIGURE_R_MAX: f64 = 5.0;
pub const FIGURE_KL_P_MAX: f64 = 2.0;
pub const FIGURE_W2_P_MAX: f64 = 1.2;

/// A labelled curve inside a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureCurve {
    pub label: String,
    pub sweep: SweepVar,
    pub points: Vec<CurvePoint>,
}

fn figure_requests(fig: FigureId) -> Vec<(String, CurveRequest)> {
    const INF: f64 = f64::INFINITY;
    let std = GaussianSpec::standard();
    let r_axis = SweepRange { lo: 0.0, hi: FIGURE_R_MAX, count: FIGURE_POINTS };
    let kl_p_axis = SweepRange { lo: 0.0, hi: FIGURE_KL_P_MAX, count: FIGURE_POINTS };
    let w2_p_axis = SweepRange { lo: 0.0, hi: FIGURE_W2_P_MAX, count: FIGURE_POINTS };
    let req = |kind, rec, sweep, range, r, rc, p| CurveRequest { kind, src: std, rec, sweep, range, fixed: FixedParams { r, rc, p } };

    match fig {
        FigureId::Fig3 => {
            let rec = GaussianSpec::new(1.0, 2.0).expect("valid spec");
            [0.0, 1.0, INF]
                .into_iter()
                .map(|rc| (format!("Rc={}", fmt_num(rc)), req(CurveKind::Ocsc, Some(rec), SweepVar::R, r_axis, None, Some(rc), None)))
                .collect()
        }
        FigureId::Fig4 => vec![("kl".into(), req(CurveKind::Kl, None, SweepVar::R, r_axis, None, Some(1.0), Some(1.0)))],
        FigureId::Fig5 => vec![("kl".into(), req(CurveKind::Kl, None, SweepVar::P, kl_p_axis, Some(1.0), Some(1.0), None))],
        FigureId::Fig6 => [0.0, 1.0, INF]
            .into_iter()
            .map(|rc| (format!("Rc={}", fmt_num(rc)), req(CurveKind::Kl, None, SweepVar::R, r_axis, None, Some(rc), Some(0.0))))
            .collect(),
        FigureId::Fig7 => [0.0, 0.1, INF]
            .into_iter()
            .map(|p| (format!("P={}", fmt_num(p)), req(CurveKind::Kl, None, SweepVar::R, r_axis, None, Some(INF), Some(p))))
            .collect(),
        FigureId::Fig8 => [0.0, 0.1, 0.5]
            .into_iter()
            .map(|r| (format!("R={}", fmt_num(r)), req(CurveKind::Kl, None, SweepVar::P, kl_p_axis, Some(r), Some(INF), None)))
            .collect(),
        FigureId::Fig9 => vec![
            ("w2_vs_R".into(), req(CurveKind::W2, None, SweepVar::R, r_axis, None, Some(1.0), Some(1.0))),
            ("w2_vs_P".into(), req(CurveKind::W2, None, SweepVar::P, w2_p_axis, Some(1.0), Some(1.0), None)),
        ],
    }
}

pub fn figure_curves(fig: FigureId) -> Result<Vec<FigureCurve>> {
    figure_requests(fig)
        .into_iter()
        .map(|(label, req)| Ok(FigureCurve { label, sweep: req.sweep, points: evaluate(&req)? }))
        .collect()
}

/// CSV with header `curve,sweep_var,value,lower,upper,tight`.
pub fn figure_csv(fig: FigureId) -> Result<String> {
    let mut out = String::from("curve,sweep_var,value,lower,upper,tight\n");
    for c in figure_curves(fig)? {
        for pt in &c.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.label,
                c.sweep.name(),
                fmt_num(pt.value),
                fmt_num(pt.lower),
                fmt_num(pt.upper),
                pt.tight
            );
        }
    }
    Ok(out)
}
