use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use dchoice::allocation::{
    hall_check, overlap_sum, pairwise_overlap_histogram, r_gap_radius, validate_regular_balanced,
    AllocationKind, HallCheck,
};
use dchoice::metrics::{
    exact_p_sigma_k3, run_limit_checks as core_limit_checks, run_point, write_rows_csv,
    ExperimentRow, LimitCheck, LimitCheckConfig,
};
use dchoice::Allocation;
use serde::Serialize;

use crate::config::{ExperimentConfig, Format, OutputSpec};
use crate::error::{CliError, CliResult};
use crate::report::{emit, write_stdout, CsvTable, Metadata};

fn csv_err(e: csv::Error) -> CliError {
    dchoice::Error::from(e).into()
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Rows(pub Vec<ExperimentRow>);

impl CsvTable for Rows {
    fn write_csv(&self, out: &mut dyn Write) -> CliResult<()> {
        Ok(write_rows_csv(&self.0, out)?)
    }
}

/// Simulates every point of the sweep with the same master seed.
pub fn run_simulate(cfg: &ExperimentConfig) -> CliResult<Rows> {
    cfg.validate_trials()?;
    let mut rows = Vec::new();
    for p in cfg.points()? {
        let alloc = p.design.build()?;
        rows.push(run_point(&alloc, p.sigma, cfg.trials, cfg.master_seed)?);
    }
    Ok(Rows(rows))
}

pub fn simulate(cfg: &ExperimentConfig) -> CliResult<()> {
    let rows = run_simulate(cfg)?;
    emit(&cfg.outputs_or(Format::Csv), &Metadata::new("simulate", cfg.master_seed, cfg), &rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub k: usize,
    pub d: usize,
    pub trials: u64,
    pub all_pass: bool,
    pub checks: Vec<LimitCheck>,
}

impl CsvTable for LimitReport {
    fn write_csv(&self, out: &mut dyn Write) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["name", "statistic", "threshold", "pass", "skipped", "detail"])
            .map_err(csv_err)?;
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                c.statistic.to_string(),
                c.threshold.to_string(),
                c.pass.to_string(),
                c.skipped.to_string(),
                c.detail.clone(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| csv_err(e.into()))?;
        Ok(())
    }
}

pub fn run_limit_checks(cfg: &ExperimentConfig) -> CliResult<LimitReport> {
    cfg.validate_trials()?;
    let sec = cfg
        .limit_checks
        .ok_or_else(|| CliError::config("limit_checks", "missing section {k, d}"))?;
    let lc = LimitCheckConfig {
        k: sec.k,
        d: sec.d,
        trials: cfg.trials,
        seed: cfg.master_seed,
        ks_threshold: sec.ks_threshold,
    };
    let checks = core_limit_checks(&lc)?;
    let all_pass = checks.iter().all(|c| c.pass || c.skipped);
    Ok(LimitReport { k: sec.k, d: sec.d, trials: cfg.trials, all_pass, checks })
}

pub fn limit_checks(cfg: &ExperimentConfig) -> CliResult<()> {
    let report = run_limit_checks(cfg)?;
    emit(&cfg.outputs_or(Format::Json), &Metadata::new("limit-checks", cfg.master_seed, cfg), &report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactRow {
    pub kind: AllocationKind,
    pub n: usize,
    pub d: usize,
    pub sigma: f64,
    pub p_sigma: f64,
    pub vertices: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct ExactRows(pub Vec<ExactRow>);

impl CsvTable for ExactRows {
    fn write_csv(&self, out: &mut dyn Write) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "n", "d", "sigma", "p_sigma", "vertices"]).map_err(csv_err)?;
        for r in &self.0 {
            let vs: Vec<String> =
                r.vertices.iter().map(|v| format!("{} {} {}", v[0], v[1], v[2])).collect();
            w.write_record([
                r.kind.to_string(),
                r.n.to_string(),
                r.d.to_string(),
                r.sigma.to_string(),
                r.p_sigma.to_string(),
                vs.join(";"),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| csv_err(e.into()))?;
        Ok(())
    }
}

pub fn run_exact_k3(cfg: &ExperimentConfig) -> CliResult<ExactRows> {
    let mut rows = Vec::new();
    for p in cfg.points()? {
        let alloc = p.design.build()?;
        let ex = exact_p_sigma_k3(&alloc, p.sigma)?;
        rows.push(ExactRow {
            kind: alloc.kind(),
            n: alloc.n(),
            d: alloc.d(),
            sigma: p.sigma,
            p_sigma: ex.p_sigma,
            vertices: ex.vertices,
        });
    }
    Ok(ExactRows(rows))
}

pub fn exact_k3(cfg: &ExperimentConfig) -> CliResult<()> {
    let rows = run_exact_k3(cfg)?;
    emit(&cfg.outputs_or(Format::Json), &Metadata::new("exact-k3", cfg.master_seed, cfg), &rows)
}

/// What `inspect` reports about one allocation.
#[derive(Debug, Clone, Serialize)]
pub struct InspectSummary {
    pub source: String,
    pub kind: AllocationKind,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub r: usize,
    pub valid: bool,
    pub violations: Vec<String>,
    /// Absent for XOR allocations, where the identity does not apply.
    pub overlap_sum: Option<usize>,
    pub r_gap_radius: usize,
    pub hall: HallCheck,
    pub matrix_rows: usize,
    pub matrix_columns: usize,
    pub overlap_histogram: BTreeMap<usize, usize>,
    #[serde(skip)]
    alloc: Allocation,
}

pub fn summarize(source: String, alloc: Allocation) -> InspectSummary {
    let violations: Vec<String> = validate_regular_balanced(&alloc).iter().map(|v| v.to_string()).collect();
    let m = alloc.to_matrices();
    InspectSummary {
        source,
        kind: alloc.kind(),
        n: alloc.n(),
        k: alloc.k(),
        d: alloc.d(),
        r: alloc.r(),
        valid: violations.is_empty(),
        violations,
        overlap_sum: overlap_sum(&alloc).ok(),
        r_gap_radius: r_gap_radius(&alloc),
        hall: hall_check(&alloc),
        matrix_rows: m.n,
        matrix_columns: m.columns(),
        overlap_histogram: pairwise_overlap_histogram(&alloc),
        alloc,
    }
}

impl InspectSummary {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "allocation: {} ({}) n={} k={} d={} r={}\n",
            self.kind, self.source, self.n, self.k, self.d, self.r
        );
        if self.valid {
            s.push_str("validation: ok\n");
        } else {
            s.push_str(&format!("validation: {} violation(s)\n", self.violations.len()));
            for v in &self.violations {
                s.push_str(&format!("  - {v}\n"));
            }
        }
        match self.overlap_sum {
            Some(v) => s.push_str(&format!("overlap_sum: {v}\n")),
            None => s.push_str("overlap_sum: n/a (XOR recovery sets)\n"),
        }
        s.push_str(&format!("r-gap radius: {}\n", self.r_gap_radius));
        s.push_str(&format!(
            "hall check: {} (matching {} of {})\n",
            if self.hall.satisfied { "pass" } else { "fail" },
            self.hall.matching_size,
            self.hall.objects
        ));
        s.push_str(&format!("matrix M: {} x {}\n", self.matrix_rows, self.matrix_columns));
        let hist: Vec<String> = self.overlap_histogram.iter().map(|(o, c)| format!("{o}: {c}")).collect();
        s.push_str(&format!("pairwise overlap histogram: {{{}}}\n", hist.join(", ")));
        s
    }
}

impl CsvTable for InspectSummary {
    fn write_csv(&self, out: &mut dyn Write) -> CliResult<()> {
        Ok(self.alloc.to_matrices().write_m_csv(out)?)
    }
}

/// Where `inspect` gets its allocations.
#[derive(Debug, Clone)]
pub enum InspectSource {
    File(PathBuf),
    Config(ExperimentConfig),
}

pub fn run_inspect(src: &InspectSource) -> CliResult<Vec<InspectSummary>> {
    match src {
        InspectSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input { path: path.clone(), message: e.to_string() })?;
            let alloc = Allocation::from_json_str(&text)
                .map_err(|e| CliError::Input { path: path.clone(), message: e.to_string() })?;
            Ok(vec![summarize(path.display().to_string(), alloc)])
        }
        InspectSource::Config(cfg) => cfg
            .designs()?
            .into_iter()
            .map(|d| {
                let label = format!("{}({}, {}, d={}, r={})", d.kind, d.n, d.k(), d.d, d.r);
                Ok(summarize(label, d.build()?))
            })
            .collect(),
    }
}

pub fn inspect(src: &InspectSource, outputs: &[OutputSpec]) -> CliResult<()> {
    let summaries = run_inspect(src)?;
    if outputs.is_empty() {
        let text: String = summaries.iter().map(|s| s.to_text()).collect::<Vec<_>>().join("\n");
        return write_stdout(text.as_bytes());
    }
    let seed = match src {
        InspectSource::Config(c) => c.master_seed,
        InspectSource::File(_) => 0,
    };
    let echo = match src {
        InspectSource::Config(c) => serde_json::to_value(c).map_err(dchoice::Error::from)?,
        InspectSource::File(p) => serde_json::json!({ "file": p }),
    };
    let meta = Metadata::new("inspect", seed, &echo);
    for spec in outputs {
        if spec.format == Format::Csv && summaries.len() != 1 {
            return Err(CliError::config("outputs", "CSV matrix export takes a single allocation"));
        }
        match spec.format {
            Format::Csv => emit(std::slice::from_ref(spec), &meta, &summaries[0])?,
            Format::Json => emit(std::slice::from_ref(spec), &meta, &Summaries(&summaries))?,
        }
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(transparent)]
struct Summaries<'a>(&'a [InspectSummary]);

impl CsvTable for Summaries<'_> {
    fn write_csv(&self, _: &mut dyn Write) -> CliResult<()> {
        Err(CliError::config("outputs", "inspect writes CSV only for the M matrix"))
    }
}
