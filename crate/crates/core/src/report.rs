//! CSV and JSON encodings of the result types.
//!
//! CSV output is UTF-8 with a header row, LF line endings, and numbers
//! printed with 12 significant digits in plain decimal notation, so reruns
//! diff byte-for-byte.

use serde::Serialize;

use crate::mean_values::MeanValueReport;
use crate::ramanujan::PropertyReport;
use crate::rf_series::{AbelTrace, RfDiagnostic};
use crate::singular::{SeriesPartialSum, SingularConstant};

/// Formats `v` with 12 significant digits, never in exponent notation.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}").to_lowercase();
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (11 - exponent).clamp(0, 60) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.into()
        }
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

/// One row per trace checkpoint of each labelled report:
/// `label,N,mean,predicted,abs_gap,rel_gap`. The final row of a label is the
/// report's empirical value.
pub fn mean_reports_csv(reports: &[(&str, &MeanValueReport)]) -> String {
    let mut w = writer();
    w.write_record(["label", "N", "mean", "predicted", "abs_gap", "rel_gap"])
        .unwrap();
    for (label, r) in reports {
        for point in &r.trace {
            let abs = r.predicted.map(|p| (point.mean - p).abs());
            let rel = r
                .predicted
                .filter(|&p| p != 0.0)
                .map(|p| (point.mean - p).abs() / p.abs());
            w.write_record([
                label.to_string(),
                point.n.to_string(),
                fmt_sig(point.mean),
                opt(r.predicted),
                opt(abs),
                opt(rel),
            ])
            .unwrap();
        }
    }
    finish(w)
}

/// `x,z,Q,value,target,gap`
pub fn abel_trace_csv(trace: &AbelTrace) -> String {
    let mut w = writer();
    w.write_record(["x", "z", "Q", "value", "target", "gap"])
        .unwrap();
    for (step, gap) in trace.ladder.iter().zip(trace.gaps()) {
        w.write_record([
            fmt_sig(trace.x),
            fmt_sig(step.z),
            step.q_used.to_string(),
            fmt_sig(step.value),
            opt(trace.target),
            opt(gap),
        ])
        .unwrap();
    }
    finish(w)
}

/// `function,argument,Q,partial_sum,reference`
pub fn rf_diagnostic_csv(diag: &RfDiagnostic) -> String {
    let mut w = writer();
    w.write_record(["function", "argument", "Q", "partial_sum", "reference"])
        .unwrap();
    for &(q, v) in &diag.trace {
        w.write_record([
            diag.function.to_string(),
            diag.argument.to_string(),
            q.to_string(),
            fmt_sig(v),
            fmt_sig(diag.reference),
        ])
        .unwrap();
    }
    finish(w)
}

/// `form,truncation_prime,value,tail_estimate`
pub fn constants_csv(constants: &[SingularConstant]) -> String {
    let mut w = writer();
    w.write_record(["form", "truncation_prime", "value", "tail_estimate"])
        .unwrap();
    for c in constants {
        w.write_record([
            c.form.label(),
            c.truncation_prime.to_string(),
            fmt_sig(c.value),
            opt(c.tail_estimate),
        ])
        .unwrap();
    }
    finish(w)
}

/// `coefficient,h,Q,partial_sum`
pub fn series_partial_csv(sum: &SeriesPartialSum) -> String {
    let mut w = writer();
    w.write_record(["coefficient", "h", "Q", "partial_sum"])
        .unwrap();
    let name = match sum.coefficient {
        crate::singular::SeriesCoefficient::MuOverPhi => "mu_over_phi",
        crate::singular::SeriesCoefficient::MuOverPhiSquared => "mu_over_phi_squared",
    };
    for &(q, v) in &sum.trace {
        w.write_record([
            name.to_string(),
            sum.h.to_string(),
            q.to_string(),
            fmt_sig(v),
        ])
        .unwrap();
    }
    finish(w)
}

/// `id,statement,cases,failures,passed,witness`
pub fn properties_csv(report: &PropertyReport) -> String {
    let mut w = writer();
    w.write_record(["id", "statement", "cases", "failures", "passed", "witness"])
        .unwrap();
    for c in &report.checks {
        w.write_record([
            c.id.clone(),
            c.statement.clone(),
            c.cases.to_string(),
            c.failures.to_string(),
            c.passed().to_string(),
            c.witness.clone().unwrap_or_default(),
        ])
        .unwrap();
    }
    finish(w)
}

/// Pretty JSON for any result type.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("result types serialize infallibly")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mean_values::TracePoint;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-2.0), "-2");
        assert_eq!(fmt_sig(1.3203237211796746), "1.32032372118");
        assert_eq!(fmt_sig(0.000023057214951238378), "0.0000230572149512");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(1e15), "1000000000000000");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    #[test]
    fn mean_csv_layout() {
        let r = MeanValueReport::from_trace(
            vec![
                TracePoint { n: 5, mean: 0.5 },
                TracePoint { n: 10, mean: 0.75 },
            ],
            Some(1.0),
        );
        let csv = mean_reports_csv(&[("pnt", &r)]);
        assert_eq!(
            csv,
            "label,N,mean,predicted,abs_gap,rel_gap\npnt,5,0.5,1,0.5,0.5\npnt,10,0.75,1,0.25,0.25\n"
        );
        let json: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
        for key in ["N", "empirical", "predicted", "abs_gap", "rel_gap", "trace"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
}
