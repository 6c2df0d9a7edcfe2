//! Serialization of check results and scan artifacts.
//!
//! CSV floats are printed with 17 significant digits so the values
//! round-trip exactly; JSON goes through serde (shortest round-trip
//! representation). With a fixed seed, repeated runs produce byte-identical
//! files.

use std::collections::BTreeMap;
use std::path::Path;

use orbitflux::chains::{CylinderMesh, FluxReport};
use orbitflux::flow::ScanRow;
use orbitflux::verify::{CheckResult, Comparison};

/// 17 significant digits: exact f64 round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn op_symbol(op: Comparison) -> &'static str {
    match op {
        Comparison::Le => "<=",
        Comparison::Ge => ">=",
        Comparison::Gt => ">",
    }
}

pub fn print_checks(checks: &[CheckResult]) {
    for c in checks {
        println!(
            "[{}] {:<32} {:>12.5e} {} {:>9.3e}   {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.measured,
            op_symbol(c.op),
            c.tolerance,
            c.description
        );
    }
}

pub fn checks_csv(checks: &[CheckResult]) -> String {
    let mut out = String::from("id,description,measured,tolerance,op,pass,anchor\n");
    for c in checks {
        out.push_str(&format!(
            "{},\"{}\",{},{},{},{},\"{}\"\n",
            c.id,
            c.description.replace('"', "'"),
            fmt_f64(c.measured),
            fmt_f64(c.tolerance),
            op_symbol(c.op),
            c.pass,
            c.anchor.replace('"', "'"),
        ));
    }
    out
}

#[derive(serde::Serialize)]
struct CheckDocument<'a> {
    schema: &'static str,
    seed: u64,
    checks: &'a [CheckResult],
}

pub fn checks_json(seed: u64, checks: &[CheckResult]) -> String {
    let doc = CheckDocument {
        schema: "orbitflux-checks-v1",
        seed,
        checks,
    };
    serde_json::to_string_pretty(&doc).expect("check serialization cannot fail") + "\n"
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("u,period,length,closure_residual,u_drift\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.u),
            fmt_f64(r.period),
            fmt_f64(r.length),
            fmt_f64(r.closure_residual),
            fmt_f64(r.u_drift),
        ));
    }
    out
}

#[derive(serde::Serialize)]
struct ScanDocument<'a> {
    schema: &'static str,
    seed: u64,
    rows: &'a [ScanRow],
    checks: &'a [CheckResult],
}

pub fn scan_json(seed: u64, rows: &[ScanRow], checks: &[CheckResult]) -> String {
    let doc = ScanDocument {
        schema: "orbitflux-orbit-scan-v1",
        seed,
        rows,
        checks,
    };
    serde_json::to_string_pretty(&doc).expect("scan serialization cannot fail") + "\n"
}

/// Mesh dump for external plotting: one row per grid point, cover
/// coordinates.
pub fn mesh_csv(mesh: &CylinderMesh) -> String {
    let mut out = String::from("s,theta_hat,x,y,z,t,u\n");
    for (j, s) in mesh.s_values.iter().enumerate() {
        for (k, theta) in mesh.theta_values.iter().enumerate() {
            let p = &mesh.points[j][k];
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_f64(*s),
                fmt_f64(*theta),
                fmt_f64(p[0]),
                fmt_f64(p[1]),
                fmt_f64(p[2]),
                fmt_f64(p[3]),
                fmt_f64(p[4]),
            ));
        }
    }
    out
}

#[derive(serde::Serialize)]
struct FluxDocument<'a> {
    schema: &'static str,
    seed: u64,
    report: &'a FluxReport,
    checks: &'a [CheckResult],
}

pub fn flux_json(seed: u64, report: &FluxReport, checks: &[CheckResult]) -> String {
    let doc = FluxDocument {
        schema: "orbitflux-flux-v1",
        seed,
        report,
        checks,
    };
    serde_json::to_string_pretty(&doc).expect("flux serialization cannot fail") + "\n"
}

#[derive(serde::Serialize)]
struct ReportDocument<'a> {
    schema: &'static str,
    seed: u64,
    pass: bool,
    checks: BTreeMap<&'a str, &'a CheckResult>,
}

/// The aggregated report: one JSON document keyed by check id.
pub fn report_json(seed: u64, checks: &[CheckResult]) -> String {
    let mut map = BTreeMap::new();
    for c in checks {
        map.insert(c.id.as_str(), c);
    }
    let doc = ReportDocument {
        schema: "orbitflux-report-v1",
        seed,
        pass: checks.iter().all(|c| c.pass),
        checks: map,
    };
    serde_json::to_string_pretty(&doc).expect("report serialization cannot fail") + "\n"
}

pub fn write_file(path: &Path, content: &str) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
        }
    }
    std::fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
