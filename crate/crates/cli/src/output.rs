//! Output formatting. Real numbers are printed with six significant digits;
//! slot counts are integers and print exactly. Missing times render as
//! NEVER, an undefined response as UNDEFINED. All rendering is deterministic
//! so identical inputs produce byte-identical output.

use consensus_halt::{ConsensusReport, ErgodicAnalysis};

/// Six significant digits for a real value (more digits appear only left of
/// the decimal point for magnitudes beyond 1e6, which stay exact).
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0.00000".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn fmt_slot(v: Option<usize>) -> String {
    v.map_or_else(|| "NEVER".into(), |k| k.to_string())
}

pub fn fmt_response(v: Option<i64>) -> String {
    v.map_or_else(|| "UNDEFINED".into(), |r| r.to_string())
}

/// One table row: the consensus level with its measured times.
pub struct LevelRow {
    pub level: f64,
    pub consensus: Option<usize>,
    pub stopping: Option<usize>,
    pub response: Option<i64>,
}

/// Fixed-width text table in the reported column order:
/// level, consensus time, stopping time, response time.
pub fn render_table(rows: &[LevelRow]) -> String {
    let header = ["level", "consensus", "stopping", "response"];
    let mut cells: Vec<[String; 4]> = Vec::with_capacity(rows.len());
    for r in rows {
        cells.push([
            sig6(r.level),
            fmt_slot(r.consensus),
            fmt_slot(r.stopping),
            fmt_response(r.response),
        ]);
    }
    let mut widths = [0usize; 4];
    for (c, h) in header.iter().enumerate() {
        widths[c] = h.len();
        for row in &cells {
            widths[c] = widths[c].max(row[c].len());
        }
    }
    let mut out = String::new();
    let emit = |out: &mut String, fields: [&str; 4]| {
        for (c, f) in fields.iter().enumerate() {
            out.push_str(f);
            if c < 3 {
                for _ in f.len()..widths[c] + 2 {
                    out.push(' ');
                }
            }
        }
        out.push('\n');
    };
    emit(&mut out, header);
    for row in &cells {
        emit(
            &mut out,
            [&row[0], &row[1], &row[2], &row[3]].map(|s| s.as_str()),
        );
    }
    out
}

/// CSV form of the same table.
pub fn render_table_csv(rows: &[LevelRow]) -> String {
    let mut out = String::from("level,consensus_time,stopping_time,response_time\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig6(r.level),
            fmt_slot(r.consensus),
            fmt_slot(r.stopping),
            fmt_response(r.response)
        ));
    }
    out
}

fn json_opt_int<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "null".into(), |k| k.to_string())
}

/// Key/value report for one level, JSON-formatted: the measured run fields
/// followed by the ergodic analysis when available.
pub fn report_json(
    level: f64,
    detector_eps: f64,
    report: &ConsensusReport,
    consensus_at_level: Option<usize>,
    response_vs_level: Option<i64>,
    analysis: Option<&ErgodicAnalysis>,
) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"level\": {},\n", sig6(level)));
    out.push_str(&format!("  \"detector_eps\": {},\n", sig6(detector_eps)));
    out.push_str(&format!(
        "  \"consensus_time\": {},\n",
        json_opt_int(consensus_at_level)
    ));
    out.push_str(&format!(
        "  \"stopping_time\": {},\n",
        json_opt_int(report.first_stop_time)
    ));
    out.push_str(&format!(
        "  \"response_time\": {},\n",
        json_opt_int(response_vs_level)
    ));
    out.push_str(&format!(
        "  \"global_eps_time\": {},\n",
        json_opt_int(report.global_eps_time)
    ));
    out.push_str(&format!(
        "  \"uniform_local_time\": {},\n",
        json_opt_int(report.uniform_local_time)
    ));
    out.push_str(&format!(
        "  \"all_stop_time\": {},\n",
        json_opt_int(report.all_stop_time)
    ));
    out.push_str(&format!(
        "  \"all_halt_latency\": {},\n",
        json_opt_int(report.all_halt_latency())
    ));
    out.push_str(&format!(
        "  \"soundness_ok\": {},\n",
        report
            .soundness_ok
            .map_or_else(|| "null".to_string(), |b| b.to_string())
    ));
    out.push_str(&format!(
        "  \"assumption_violated\": {},\n",
        report.assumption_violated
    ));
    out.push_str(&format!(
        "  \"fast_round_messages\": {}",
        report.fast_round_messages
    ));
    if let Some(a) = analysis {
        out.push_str(",\n");
        out.push_str(&format!("  \"diameter\": {},\n", a.diameter));
        out.push_str(&format!("  \"h\": {},\n", a.h));
        out.push_str(&format!("  \"tau_h\": {},\n", sig6(a.tau_h)));
        out.push_str(&format!("  \"bound\": {}\n", a.bound));
    } else {
        out.push('\n');
    }
    out.push_str("}\n");
    out
}
