//! Multi-instance, multi-seed sweeps with gaps against a reference table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use vrpkit_core::{
    build_distance_matrix, check_solution, classify_with, parse_instance, solve_with_matrix, ClassifyOptions,
    Instance, Rounding, SolverConfig,
};

/// Percent gap of `objective` over `reference`; `None` unless the reference
/// is positive.
pub fn gap(objective: f64, reference: f64) -> Option<f64> {
    (reference > 0.0).then(|| (objective - reference) / reference * 100.0)
}

/// Reads `name objective` lines; blank lines and `#` comments are skipped.
pub fn parse_reference(text: &str) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let mut cols = t.split_whitespace();
        let (Some(name), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(format!("line {}: expected `name objective`", i + 1));
        };
        let v: f64 = v.parse().map_err(|_| format!("line {}: bad objective {v:?}", i + 1))?;
        out.insert(name.to_string(), v);
    }
    Ok(out)
}

/// Files in `dir` that look like instances, sorted by name.
pub fn instance_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    const EXT: [&str; 6] = ["vrp", "tsp", "atsp", "sop", "evrp", "txt"];
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| EXT.contains(&e.to_ascii_lowercase().as_str()))
        })
        .filter(|p| {
            // reference tables commonly share the directory
            std::fs::read_to_string(p).is_ok_and(|t| t.contains("DIMENSION"))
        })
        .collect();
    v.sort();
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub solver: SolverConfig,
    pub classify: ClassifyOptions,
    pub seeds: Vec<u64>,
    pub workers: usize,
}

/// One solve of one instance with one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub name: String,
    pub seed: u64,
    pub variant: String,
    pub objective: Option<f64>,
    pub wall_time: f64,
    pub feasible: bool,
    pub runtime_error: bool,
    pub error: Option<String>,
}

/// Best-of-seeds result for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub variant: String,
    pub objective: Option<f64>,
    pub reference: Option<f64>,
    pub gap: Option<f64>,
    /// Sum over seeds.
    pub wall_time: f64,
    pub feasible: bool,
    pub runtime_error: bool,
    pub runs: Vec<RunRow>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

/// Parse, classify, solve and check; the clock covers parse and solve.
pub fn run_one(path: &Path, seed: u64, cfg: &BenchConfig) -> RunRow {
    let t = Instant::now();
    let mut row = RunRow {
        name: file_stem(path),
        seed,
        variant: String::new(),
        objective: None,
        wall_time: 0.0,
        feasible: false,
        runtime_error: true,
        error: None,
    };
    let result = (|| -> Result<(String, f64, bool), String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let inst: Instance<f64> = parse_instance(&text).map_err(|e| e.to_string())?;
        let sig = classify_with(&inst, &cfg.classify);
        let solver = SolverConfig {
            seed,
            ..cfg.solver.clone()
        };
        let rounding = solver.rounding.unwrap_or_else(|| Rounding::default_for(&inst));
        let dm = build_distance_matrix(&inst, rounding).map_err(|e| e.to_string())?;
        let (sol, _) = solve_with_matrix(&inst, &sig.set, &dm, &solver).map_err(|e| e.to_string())?;
        let ok = check_solution(&sol, &inst, &sig.set, &dm).feasible();
        Ok((sig.code, sol.cost, ok))
    })();
    row.wall_time = t.elapsed().as_secs_f64();
    match result {
        Ok((code, obj, ok)) => {
            row.variant = code;
            row.objective = Some(obj);
            row.feasible = ok;
            row.runtime_error = false;
        }
        Err(e) => row.error = Some(e),
    }
    row
}

fn lookup(refs: &BTreeMap<String, f64>, name: &str) -> Option<f64> {
    refs.get(name).copied()
}

/// Solves every `(instance, seed)` pair on `cfg.workers` threads. Rows are
/// assembled afterwards in input order, so the worker count does not change
/// the report.
pub fn run_bench(paths: &[PathBuf], refs: &BTreeMap<String, f64>, cfg: &BenchConfig) -> Result<BenchReport, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| e.to_string())?;
    let jobs: Vec<(usize, u64)> = (0..paths.len())
        .flat_map(|i| cfg.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let runs: Vec<RunRow> = pool.install(|| jobs.par_iter().map(|&(i, s)| run_one(&paths[i], s, cfg)).collect());

    let mut rows = Vec::with_capacity(paths.len());
    for (i, path) in paths.iter().enumerate() {
        let mine: Vec<RunRow> = runs
            .iter()
            .zip(&jobs)
            .filter(|(_, j)| j.0 == i)
            .map(|(r, _)| r.clone())
            .collect();
        let name = file_stem(path);
        let best = mine
            .iter()
            .filter(|r| r.feasible)
            .filter_map(|r| r.objective)
            .min_by(|a, b| a.total_cmp(b));
        let reference = lookup(refs, &name);
        if reference.is_none() && !refs.is_empty() {
            eprintln!("warning: no reference objective for {name}");
        }
        rows.push(BenchRow {
            variant: mine.iter().find(|r| !r.variant.is_empty()).map_or_else(String::new, |r| r.variant.clone()),
            objective: best,
            reference,
            gap: best.zip(reference).and_then(|(o, r)| gap(o, r)),
            wall_time: mine.iter().map(|r| r.wall_time).sum(),
            feasible: best.is_some(),
            runtime_error: mine.iter().all(|r| r.runtime_error),
            runs: mine,
            name,
        });
    }
    Ok(BenchReport { rows })
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = v.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

impl BenchReport {
    pub fn mean_objective(&self) -> Option<f64> {
        mean(self.rows.iter().filter_map(|r| r.objective))
    }

    pub fn mean_gap(&self) -> Option<f64> {
        mean(self.rows.iter().filter_map(|r| r.gap))
    }

    pub fn total_time(&self) -> f64 {
        self.rows.iter().map(|r| r.wall_time).sum()
    }

    fn percent(&self, pred: impl Fn(&BenchRow) -> bool) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| pred(r)).count() as f64 / self.rows.len() as f64 * 100.0
    }

    /// Share of instances whose every run failed with an error.
    pub fn rer(&self) -> f64 {
        self.percent(|r| r.runtime_error)
    }

    /// Share of instances with a checked feasible solution.
    pub fn sr(&self) -> f64 {
        self.percent(|r| r.feasible)
    }

    /// Column-aligned table with an aggregate footer.
    pub fn table(&self) -> String {
        let opt = |v: Option<f64>, p: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.p$}"));
        let mut lines = vec![[
            "name".to_string(),
            "variant".into(),
            "objective".into(),
            "reference".into(),
            "gap%".into(),
            "time_s".into(),
            "status".into(),
        ]];
        for r in &self.rows {
            let status = if r.runtime_error {
                "error"
            } else if r.feasible {
                "ok"
            } else {
                "infeasible"
            };
            lines.push([
                r.name.clone(),
                r.variant.clone(),
                opt(r.objective, 2),
                opt(r.reference, 2),
                opt(r.gap, 2),
                format!("{:.3}", r.wall_time),
                status.into(),
            ]);
        }
        let widths: Vec<usize> = (0..7).map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        let _ = writeln!(
            out,
            "mean objective {}  mean gap {}%  total time {:.3}s  RER {:.2}%  SR {:.2}%",
            opt(self.mean_objective(), 2),
            opt(self.mean_gap(), 2),
            self.total_time(),
            self.rer(),
            self.sr()
        );
        out
    }

    /// One row per run, then one `best` row per instance.
    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "name",
            "seed",
            "variant",
            "objective",
            "reference",
            "gap",
            "wall_time",
            "feasible",
            "runtime_error",
        ])?;
        let num = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for r in &self.rows {
            for run in &r.runs {
                let g = run.objective.zip(r.reference).and_then(|(o, f)| gap(o, f));
                wr.write_record([
                    run.name.clone(),
                    run.seed.to_string(),
                    run.variant.clone(),
                    num(run.objective),
                    num(r.reference),
                    num(g),
                    run.wall_time.to_string(),
                    run.feasible.to_string(),
                    run.runtime_error.to_string(),
                ])?;
            }
            wr.write_record([
                r.name.clone(),
                "best".into(),
                r.variant.clone(),
                num(r.objective),
                num(r.reference),
                num(r.gap),
                r.wall_time.to_string(),
                r.feasible.to_string(),
                r.runtime_error.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}
