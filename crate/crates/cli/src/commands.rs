use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use surfq_core::brackets::{verify_classical, ClassicalSettings};
use surfq_core::quantize::{
    build_ladder, discriminator, hamiltonian, ordering_identity_checks, p_squared_consistency,
    quantum_condition_residuals, reports_table, spectrum_with, DiscriminatorReport, SpectrumOptions, SurfaceGrid,
    VerificationReport, DISCRIMINATOR_RATIO, EXACT_RELATIVE, HAMILTONIAN_VARIANT, MIN_ORDER, ORDER_TOLERANCE,
    PLATEAU_ORDER, QUANTUM_IDENTITIES, TARGET_ORDER, TEST_SUITE_VERSION,
};
use surfq_core::surface::{curvature_table, write_curvature_csv, CURVATURE_COLUMNS};
use surfq_core::VERSION;

use crate::config::{Format, RunConfig};

const DISCRIMINATED: [&str; 3] = ["EQ14", "EQ16", "EQ17"];

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    #[serde(flatten)]
    config: &'a RunConfig,
}

fn provenance<'a>(command: &'a str, config: &'a RunConfig) -> Provenance<'a> {
    Provenance {
        tool: "surfq",
        version: VERSION,
        command,
        config,
    }
}

/// One-line provenance header for tables.
fn header(command: &str, config: &RunConfig) -> String {
    let params: Vec<String> = config.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let grids: Vec<String> = config.grids.iter().map(|(n, m)| format!("{n}x{m}")).collect();
    let [x, y, z] = config.center;
    format!(
        "# surfq {VERSION} {command} surface={} {} center={x},{y},{z} flipped={} grids={} seed={} samples={} tol={:e} k={} geometric_potential={} hbar={} mass={} threads={}",
        config.surface.name(),
        params.join(" "),
        config.flipped,
        grids.join(","),
        config.seed,
        config.samples,
        config.tolerance,
        config.k,
        config.include_geometric_potential,
        config.constants.hbar,
        config.constants.mass,
        config.threads,
    )
}

/// Sends the table or JSON to standard output and the JSON to `--out`.
fn emit(config: &RunConfig, table: &str, report: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    if let Some(path) = &config.out {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut stdout = std::io::stdout().lock();
    let written = match config.format {
        Format::Table => stdout.write_all(table.as_bytes()),
        Format::Json => stdout.write_all(text.as_bytes()),
    }
    .and_then(|()| stdout.flush());
    match written {
        // A closed pipe (for example `| head`) is not an error.
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn curvature(config: &RunConfig) -> Result<bool> {
    ensure!(
        !config.explicit_grids || config.grids.len() == 1,
        "curvature takes a single --grid"
    );
    let (n_u, n_v) = config.grids[0];
    let surface = config.build_surface()?;
    let rows = curvature_table(&surface, n_u, n_v, &config.constants)?;
    let mut table = Vec::new();
    writeln!(table, "{}", header("curvature", config))?;
    write_curvature_csv(&rows, &mut table)?;
    let report = json!({
        "provenance": provenance("curvature", config),
        "grid": [n_u, n_v],
        "columns": CURVATURE_COLUMNS,
        "rows": rows.iter().map(|r| r.values()).collect::<Vec<_>>(),
    });
    emit(config, &String::from_utf8(table)?, &report)?;
    Ok(true)
}

pub fn brackets(config: &RunConfig) -> Result<bool> {
    let surface = config.build_surface()?;
    let settings = ClassicalSettings {
        samples: config.samples,
        seed: config.seed,
        tolerance: config.tolerance,
        threads: config.threads,
        constants: config.constants,
    };
    let report = verify_classical(&surface, &settings)?;
    let pass = report.all_pass();
    let table = format!(
        "{}\n{}{}\n",
        header("brackets", config),
        report.table(),
        if pass { "all identities PASS" } else { "some identities FAIL" }
    );
    let json = json!({
        "provenance": provenance("brackets", config),
        "surface": report.surface,
        "identities": report.by_id(),
        "pass": pass,
    });
    emit(config, &table, &json)?;
    Ok(pass)
}

pub fn spectrum(config: &RunConfig) -> Result<bool> {
    let surface = config.build_surface()?;
    let options = SpectrumOptions {
        tolerance: config.tolerance,
        seed: config.seed,
        ..SpectrumOptions::new(config.k)
    };
    let mut table = header("spectrum", config) + "\n";
    let mut runs = Vec::new();
    for &(n_u, n_v) in &config.grids {
        let grid = SurfaceGrid::new(&surface, n_u, n_v)?;
        let h = hamiltonian(&grid, config.include_geometric_potential, &config.constants);
        let result = spectrum_with(&h, &options).with_context(|| format!("spectrum on the {n_u}x{n_v} grid"))?;
        writeln!(table, "# grid {n_u}x{n_v} iterations {}", result.iterations)?;
        table.push_str(&result.table());
        runs.push(json!({
            "grid": [n_u, n_v],
            "eigenvalues": result.eigenvalues,
            "residuals": result.residuals,
            "iterations": result.iterations,
            "max_residual": result.max_residual,
            "shift": result.shift,
        }));
    }
    let json = json!({
        "provenance": provenance("spectrum", config),
        "runs": runs,
    });
    emit(config, &table, &json)?;
    Ok(true)
}

fn criteria() -> Value {
    json!({
        "exact_relative": EXACT_RELATIVE,
        "min_order": MIN_ORDER,
        "target_order": TARGET_ORDER,
        "order_tolerance": ORDER_TOLERANCE,
        "discriminator_ratio": DISCRIMINATOR_RATIO,
        "plateau_order": PLATEAU_ORDER,
        "test_suite_version": TEST_SUITE_VERSION,
        "hamiltonian_variant": HAMILTONIAN_VARIANT,
    })
}

fn discriminator_line(d: &DiscriminatorReport) -> String {
    format!(
        "{} discriminator: V_G {}, ratio {:.3e}, floor order {}, {}\n",
        d.identity,
        if d.potential_constant { "constant" } else { "varying" },
        d.ratio,
        d.floor_order.map_or("n/a".to_string(), |o| format!("{o:.3}")),
        d.status
    )
}

pub fn verify_quantum(config: &RunConfig) -> Result<bool> {
    let known: Vec<&str> = QUANTUM_IDENTITIES.iter().map(|(id, _)| *id).collect();
    for id in &config.identities {
        if config.discriminator {
            ensure!(
                DISCRIMINATED.contains(&id.as_str()),
                "no discriminator for `{id}`; choose from {DISCRIMINATED:?}"
            );
        } else {
            ensure!(known.contains(&id.as_str()), "unknown identity `{id}`; choose from {known:?}");
        }
    }
    let surface = config.build_surface()?;
    let ladder = build_ladder(&surface, &config.grids)?;
    let selected = |id: &str| config.identities.is_empty() || config.identities.iter().any(|s| s == id);
    let mut table = header("verify-quantum", config) + "\n";

    let (pass, json) = if config.discriminator {
        let mut reports = Vec::new();
        for id in DISCRIMINATED.into_iter().filter(|id| selected(id)) {
            let d = discriminator(&ladder, &config.constants, id)?;
            table.push_str(&reports_table(&[d.with_vg.clone(), d.without_vg.clone()]));
            table.push_str(&discriminator_line(&d));
            reports.push(d);
        }
        let pass = reports.iter().all(|d| d.pass);
        let json = json!({
            "provenance": provenance("verify-quantum", config),
            "criteria": criteria(),
            "discriminators": reports,
            "pass": pass,
        });
        (pass, json)
    } else {
        let mut reports: Vec<VerificationReport> =
            quantum_condition_residuals(&ladder, &config.constants, config.include_geometric_potential)?;
        reports.extend(ordering_identity_checks(&ladder, &config.constants)?);
        reports.push(p_squared_consistency(&ladder, &config.constants)?);
        reports.retain(|r| selected(&r.identity));
        if reports.is_empty() {
            bail!("no identities selected");
        }
        table.push_str(&reports_table(&reports));
        let pass = reports.iter().all(|r| r.pass);
        let json = json!({
            "provenance": provenance("verify-quantum", config),
            "criteria": criteria(),
            "reports": reports,
            "pass": pass,
        });
        (pass, json)
    };
    writeln!(table, "{}", if pass { "all identities PASS" } else { "some identities FAIL" })?;
    emit(config, &table, &json)?;
    Ok(pass)
}
