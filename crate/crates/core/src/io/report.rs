//! Analysis reports in text and JSON form.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::lattice::CrystalFramework;
use crate::linalg::{rank_evidence, RankEvidence};
use crate::rigidity::{
    analyze_counts, decode_raw, flex_space, is_affinely_rigid, restricted_operator, stress_space,
    AffineRigidity, CountReport, MatrixSpace, SpaceKind,
};
use crate::scalar::Scalar;
use crate::symmetry::{
    character_row, commutant_basis, symmetry_counts, verify_symmetry_equation, CharacterRow,
    SymmetryCountReport, SymmetryElement,
};

/// Character rows and symmetry-equation residuals above this are reported as
/// inconsistencies.
pub const RESIDUAL_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameworkSummary {
    pub dimension: usize,
    pub vertex_classes: usize,
    pub edge_classes: usize,
    pub det_z: f64,
    pub tolerance: f64,
}

/// A flex `(u, A)` with `u` split per vertex class and `A` as rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VelocityRecord {
    pub u: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeReport {
    pub counts: CountReport,
    pub rank: RankEvidence,
    pub flex_basis: Vec<VelocityRecord>,
    pub stress_basis: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub counts: SymmetryCountReport,
    pub equation_residual: f64,
    /// Rows for the identity and the element on `E = E_g`.
    pub characters: Vec<CharacterRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub framework: FrameworkSummary,
    pub modes: Vec<ModeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affine_rigidity: Option<AffineRigidity>,
    pub symmetries: Vec<SymmetryReport>,
    pub inconsistencies: Vec<String>,
}

/// Rounds to 12 significant digits and clears negative zero.
fn display_round(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let scale = 10f64.powi(11 - x.abs().log10().floor() as i32);
    let r = (x * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Flips `v` so that its first entry of largest magnitude is positive.
fn canonical_sign<T: Scalar>(v: &DVector<T>) -> DVector<T> {
    let mut best = T::zero();
    for &x in v.iter() {
        if x.abs() > best.abs() + T::lit(1e-9) {
            best = x;
        }
    }
    if best < T::zero() {
        -v
    } else {
        v.clone()
    }
}

/// Entry of a unit basis vector for display: rounding noise becomes zero.
fn clean<T: Scalar>(x: T) -> f64 {
    let x = x.as_f64();
    if x.abs() < 1e-12 {
        0.0
    } else {
        display_round(x)
    }
}

fn rows_of<T: Scalar>(m: &DMatrix<T>) -> Vec<Vec<f64>> {
    m.row_iter()
        .map(|r| r.iter().map(|&x| clean(x)).collect())
        .collect()
}

fn mode_report<T: Scalar>(fw: &CrystalFramework<T>, space: &MatrixSpace<T>) -> Result<ModeReport> {
    let counts = analyze_counts(fw, space)?;
    let rank = rank_evidence(&restricted_operator(fw, space)?, fw.tol());
    let flex = flex_space(fw, space)?;
    let flex_basis = flex
        .basis()
        .column_iter()
        .map(|c| {
            let x = decode_raw(fw, &canonical_sign(&c.into_owned()));
            VelocityRecord {
                u: (0..fw.vertex_count())
                    .map(|k| x.velocity(k).iter().map(|&a| clean(a)).collect())
                    .collect(),
                a: rows_of(&x.a),
            }
        })
        .collect();
    let stress_basis = stress_space(fw, space)?
        .basis()
        .column_iter()
        .map(|c| {
            canonical_sign(&c.into_owned())
                .iter()
                .map(|&a| clean(a))
                .collect()
        })
        .collect();
    Ok(ModeReport {
        counts,
        rank,
        flex_basis,
        stress_basis,
    })
}

fn symmetry_report<T: Scalar>(
    fw: &CrystalFramework<T>,
    g: &SymmetryElement<T>,
    characters: bool,
) -> Result<SymmetryReport> {
    let counts = symmetry_counts(fw, g)?;
    let equation_residual = verify_symmetry_equation(fw, g, None)?.as_f64();
    let mut rows = Vec::new();
    if characters {
        let e_g = commutant_basis(g.linear(), fw.tol());
        rows.push(character_row(fw, &SymmetryElement::identity(fw), &e_g)?);
        rows.push(character_row(fw, g, &e_g)?);
    }
    Ok(SymmetryReport {
        counts,
        equation_residual,
        characters: rows,
    })
}

/// Options for [`analyze`].
#[derive(Clone, Debug)]
pub struct AnalysisOptions<T: Scalar> {
    pub spaces: Vec<MatrixSpace<T>>,
    /// Names of the declared symmetries to analyse; `None` means all.
    pub symmetries: Option<Vec<String>>,
    pub characters: bool,
}

impl<T: Scalar> AnalysisOptions<T> {
    /// Strict and fully affine counts, no symmetry analysis.
    pub fn counts(d: usize) -> Self {
        Self {
            spaces: vec![MatrixSpace::zero(d), MatrixSpace::full(d)],
            symmetries: Some(Vec::new()),
            characters: false,
        }
    }
}

/// Runs the requested analyses and collects every failed identity.
pub fn analyze<T: Scalar>(
    fw: &CrystalFramework<T>,
    options: &AnalysisOptions<T>,
) -> Result<AnalysisReport> {
    fw.ensure_valid()?;
    let framework = FrameworkSummary {
        dimension: fw.dim(),
        vertex_classes: fw.vertex_count(),
        edge_classes: fw.edge_count(),
        det_z: display_round(fw.lattice().det().as_f64()),
        tolerance: fw.tol().as_f64(),
    };
    let modes = options
        .spaces
        .iter()
        .map(|e| mode_report(fw, e))
        .collect::<Result<Vec<_>>>()?;
    let affine_rigidity = if options.spaces.iter().any(|e| e.kind() == SpaceKind::Full) {
        Some(is_affinely_rigid(fw)?)
    } else {
        None
    };
    let selected: Vec<&SymmetryElement<T>> = match &options.symmetries {
        None => fw.symmetries().iter().collect(),
        Some(names) => fw
            .symmetries()
            .iter()
            .filter(|g| names.iter().any(|n| n == g.name()))
            .collect(),
    };
    let symmetries = selected
        .into_iter()
        .map(|g| symmetry_report(fw, g, options.characters))
        .collect::<Result<Vec<_>>>()?;

    let mut inconsistencies = Vec::new();
    for m in &modes {
        let c = &m.counts;
        if c.identity_residual != 0 {
            inconsistencies.push(format!(
                "{}: count residual {}",
                c.mode, c.identity_residual
            ));
        }
        if !c.rigid_contained {
            inconsistencies.push(format!("{}: rigid motions are not flexes", c.mode));
        }
    }
    for s in &symmetries {
        let name = &s.counts.element;
        if s.counts.identity_residual != 0 {
            inconsistencies.push(format!(
                "{name}: count residual {}",
                s.counts.identity_residual
            ));
        }
        if s.equation_residual > RESIDUAL_LIMIT {
            inconsistencies.push(format!(
                "{name}: symmetry equation residual {:e}",
                s.equation_residual
            ));
        }
        for row in &s.characters {
            if row.residual > RESIDUAL_LIMIT {
                inconsistencies.push(format!(
                    "{}: character residual {:e}",
                    row.element, row.residual
                ));
            }
        }
    }
    Ok(AnalysisReport {
        framework,
        modes,
        affine_rigidity,
        symmetries,
        inconsistencies,
    })
}

impl AnalysisReport {
    pub fn is_consistent(&self) -> bool {
        self.inconsistencies.is_empty()
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

fn verdict(c: &CountReport) -> String {
    if c.m > 0 {
        let plural = if c.m == 1 { "" } else { "s" };
        return format!("{} mechanism{plural}", c.m);
    }
    match c.space {
        SpaceKind::Zero => "periodically infinitesimally rigid".into(),
        SpaceKind::Full => "affinely infinitesimally rigid".into(),
        k => format!("infinitesimally rigid for E = {}", k.as_str()),
    }
}

fn text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let f = &report.framework;
    let _ = writeln!(
        out,
        "framework: d={} |Fv|={} |Fe|={} det Z={} tol={:e}",
        f.dimension, f.vertex_classes, f.edge_classes, f.det_z, f.tolerance
    );
    for m in &report.modes {
        let c = &m.counts;
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "[{}] E = {} (dim {})",
            c.mode,
            c.space.as_str(),
            c.dim_e
        );
        let _ = writeln!(
            out,
            "  rank {} (sigma_max {:.6e}, threshold {:.3e}), flex dim {}",
            m.rank.rank, m.rank.sigma_max, m.rank.threshold, c.flex_dim
        );
        let _ = writeln!(out, "  m={} s={} f={}", c.m, c.s, c.f);
        let _ = writeln!(out, "  m - s = d|Fv| + dimE - |Fe| - f");
        let _ = writeln!(
            out,
            "  {} - {} = {} + {} - {} - {}   (residual {})",
            c.m, c.s, c.vertex_dofs, c.dim_e, c.edge_classes, c.f, c.identity_residual
        );
        let _ = writeln!(out, "  {}", verdict(c));
        for (i, v) in m.flex_basis.iter().enumerate() {
            let u: Vec<String> = v.u.iter().map(|b| fmt_vec(b)).collect();
            let a: Vec<String> = v.a.iter().map(|r| fmt_vec(r)).collect();
            let _ = writeln!(
                out,
                "  flex {i}: u = {}  A = [{}]",
                u.join(" "),
                a.join(", ")
            );
        }
        for (i, w) in m.stress_basis.iter().enumerate() {
            let _ = writeln!(out, "  stress {i}: {}", fmt_vec(w));
        }
    }
    if let Some(r) = &report.affine_rigidity {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "affine rigidity: rank [R X] = {}, required {} -> {}",
            r.rank,
            r.required,
            if r.rigid { "rigid" } else { "not rigid" }
        );
    }
    for s in &report.symmetries {
        let c = &s.counts;
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "symmetry {} ({})",
            c.element,
            if c.separable {
                "separable"
            } else {
                "nonseparable"
            }
        );
        let _ = writeln!(
            out,
            "  dim F_g={} dim E_g={} dim H_v^g={} e_g={} f_g={} m_g={} s_g={}",
            c.dim_f_g, c.dim_e_g, c.dim_h_v_g, c.e_g, c.f_g, c.m_g, c.s_g
        );
        if c.separable {
            let _ = writeln!(out, "  m_g - s_g = dim F_g + dim E_g - e_g - f_g");
            let _ = writeln!(
                out,
                "  {} - {} = {} + {} - {} - {}   (residual {})",
                c.m_g, c.s_g, c.dim_f_g, c.dim_e_g, c.e_g, c.f_g, c.identity_residual
            );
        } else {
            let _ = writeln!(out, "  m_g - s_g = dim H_v^g - e_g - f_g");
            let _ = writeln!(
                out,
                "  {} - {} = {} - {} - {}   (residual {})",
                c.m_g, c.s_g, c.dim_h_v_g, c.e_g, c.f_g, c.identity_residual
            );
        }
        let _ = writeln!(
            out,
            "  symmetry equation residual {:e}",
            s.equation_residual
        );
        let _ = writeln!(
            out,
            "  {}",
            if c.predictor_fires {
                "counts force a g-symmetric non-rigid flex"
            } else {
                "counts are inconclusive"
            }
        );
        if !s.characters.is_empty() {
            let _ = writeln!(
                out,
                "  characters on E_g:   vertex    edge   rigid    mech  stress  residual"
            );
            for r in &s.characters {
                let _ = writeln!(
                    out,
                    "    {:<16} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>7.3}  {:.1e}",
                    r.element,
                    r.trace_vertex,
                    r.trace_edge,
                    r.trace_rigid,
                    r.trace_mech,
                    r.trace_stress,
                    r.residual
                );
            }
        }
    }
    if !report.inconsistencies.is_empty() {
        let _ = writeln!(out);
        for i in &report.inconsistencies {
            let _ = writeln!(out, "INCONSISTENT: {i}");
        }
    }
    out
}

/// Renders a report; JSON output has a fixed field order.
pub fn emit_report(report: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => text(report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}
