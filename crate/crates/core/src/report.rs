//! CSV and JSON artifacts.

use serde_json::{json, Value};

use crate::bifurcation::BifurcationDiagram;

pub const CSV_HEADER: &str =
    "lambda,count,pinched,alpha_mean,kappa_mean,beta_mean,gamma_alpha,gamma_kappa,gamma_beta,gap_min,gap_max,horizon";

/// `printf("%.17g", x)`.
pub fn fmt_g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..P).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mant), sign, exp.abs())
    } else {
        trim(&format!("{:.*}", (P - 1 - exp) as usize, x))
    }
}

fn opt(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map(fmt_g17).unwrap_or_default()
}

/// Sweep rows in the fixed column order; missing values are empty fields.
pub fn diagram_csv(d: &BifurcationDiagram) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &d.rows {
        let fields = [
            fmt_g17(r.lambda),
            if r.count == 0 { String::new() } else { r.count.to_string() },
            r.pinched.to_string(),
            opt(r.alpha_mean),
            opt(r.kappa_mean),
            opt(r.beta_mean),
            opt(r.gamma_alpha),
            opt(r.gamma_kappa),
            opt(r.gamma_beta),
            opt(r.gap_min),
            opt(r.gap_max),
            opt(r.horizon),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Summary JSON mirroring the diagram, with a top-level `degraded` array.
pub fn diagram_summary(d: &BifurcationDiagram) -> Value {
    json!({
        "family": d.family,
        "classification": d.classification.as_str(),
        "sweep_verdict": d.sweep_verdict.as_str(),
        "spectrum_verdict": d.spectrum_verdict.map(|c| c.as_str()),
        "zero_crossing": d.zero_crossing,
        "points": d.points,
        "rows": d.rows,
        "degraded": d.degraded,
    })
}
