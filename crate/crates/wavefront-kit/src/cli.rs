//! Command-line front end: one thin binary wiring the library modules to
//! reproducible CSV/JSON emission.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Result, WfError};
use crate::geometry::{MetricModel, Pt};
use crate::kernel::{KernelRequest, SpectralReference, kernel_oscillatory, kernel_spectral};
use crate::scalar::C64;
use crate::{caustics, flow, phase, spectral, symbolcalc};

#[derive(Parser, Debug)]
#[command(
    name = "wavefront-kit",
    about = "Wave-propagator construction on 2-D Riemannian models",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed echoed into the output header for reproducibility bookkeeping.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (WAVEFRONT_THREADS overrides; default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ModelArg {
    /// Model definition JSON file.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Cogeodesic flow samples over a time grid.
    Flow {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_parser = parse_pair, default_value = "0,0")]
        y: Pt,
        #[arg(long, value_parser = parse_pair)]
        eta: Pt,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Branch-tracked weight along a trajectory.
    Phase {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_parser = parse_pair, default_value = "0,0")]
        y: Pt,
        #[arg(long, value_parser = parse_pair)]
        eta: Pt,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Maslov index of a periodic trajectory.
    Maslov {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_parser = parse_pair, default_value = "0,0")]
        y: Pt,
        #[arg(long, value_parser = parse_pair)]
        eta: Pt,
        #[arg(long = "T")]
        t_loop: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
    },
    /// Subprincipal symbol and first-transport-equation residual.
    Symbol {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_parser = parse_pair, default_value = "0,0")]
        y: Pt,
        #[arg(long, value_parser = parse_pair)]
        eta: Pt,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Single evaluation time (alternative to a grid).
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Identity-operator symbol table at t = 0.
    IdentitySymbol {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
    },
    /// Oscillatory-integral kernel against the spectral reference.
    Kernel {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_parser = parse_pair)]
        x: Pt,
        #[arg(long, value_parser = parse_pair, default_value = "0,0")]
        y: Pt,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 30.0)]
        regulator: f64,
        #[arg(long, default_value_t = 256)]
        angular_nodes: usize,
        #[arg(long, default_value_t = 400)]
        radial_nodes: usize,
        #[arg(long, default_value_t = 0.4)]
        t0: f64,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// Mollified counting-function derivative against the leading Weyl term.
    Weyl {
        #[arg(long, default_value_t = 50.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 200.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
    },
}

fn parse_pair(s: &str) -> std::result::Result<Pt, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got '{s}'"));
    }
    let a = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([a, b])
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

struct Emitter {
    format: Format,
    header: String,
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    pre_lines: Vec<String>,
}

impl Emitter {
    fn new(format: Format, header: String, columns: Vec<&'static str>) -> Self {
        Emitter {
            format,
            header,
            columns,
            rows: Vec::new(),
            pre_lines: Vec::new(),
        }
    }

    fn line(&mut self, s: String) {
        self.pre_lines.push(s);
    }

    fn row(&mut self, r: Vec<f64>) {
        self.rows.push(r);
    }

    fn write(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for l in &self.pre_lines {
            writeln!(out, "{l}")?;
        }
        match self.format {
            Format::Csv => {
                writeln!(out, "# {}", self.header)?;
                writeln!(out, "{}", self.columns.join(","))?;
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(|&v| fmt(v)).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), serde_json::json!(v)))
                            .collect();
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                let doc = serde_json::json!({"config": self.header, "rows": rows});
                writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            }
        }
        Ok(())
    }
}

fn grid(t0: f64, t1: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    (0..n)
        .map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64)
        .collect()
}

fn execute(cli: &Cli, em_out: &mut dyn Write) -> Result<()> {
    let header = format!("{:?} seed={}", cli.cmd, cli.seed);
    match &cli.cmd {
        Cmd::Flow {
            model,
            y,
            eta,
            t0,
            t1,
            samples,
        } => {
            let m = MetricModel::from_json_file(&model.model)?;
            let ts = grid(*t0, *t1, *samples);
            let states = flow::integrate_flow(&m, *y, *eta, &ts, 1e-12)?;
            let mut em = Emitter::new(
                cli.format,
                header,
                vec!["t", "x1", "x2", "xi1", "xi2", "det_dx_deta", "h"],
            );
            for s in &states {
                let det = s.dx_deta[0][0] * s.dx_deta[1][1] - s.dx_deta[0][1] * s.dx_deta[1][0];
                let h = flow::hamiltonian(&m, s.x_star, s.xi_star)?;
                em.row(vec![
                    s.t,
                    s.x_star[0],
                    s.x_star[1],
                    s.xi_star[0],
                    s.xi_star[1],
                    det,
                    h,
                ]);
            }
            em.write(em_out).map_err(io_err)?;
        }
        Cmd::Phase {
            model,
            y,
            eta,
            eps,
            t0,
            t1,
            samples,
        } => {
            let m = MetricModel::from_json_file(&model.model)?;
            let ts = grid(*t0, *t1, *samples);
            let ws = phase::weight_eval(&m, *y, *eta, *eps, &ts)?;
            let mut em = Emitter::new(
                cli.format,
                header,
                vec!["t", "re_det2", "im_det2", "branch_arg", "re_w", "im_w"],
            );
            for w in &ws {
                em.row(vec![
                    w.t,
                    w.det2.re,
                    w.det2.im,
                    w.branch_arg,
                    w.value.re,
                    w.value.im,
                ]);
            }
            em.write(em_out).map_err(io_err)?;
        }
        Cmd::Maslov {
            model,
            y,
            eta,
            t_loop,
            eps,
            steps,
        } => {
            let m = MetricModel::from_json_file(&model.model)?;
            // snap the requested period onto the nearby exact loop
            let t_star = refine_loop_time(&m, *y, *eta, *t_loop)?;
            let path = caustics::maslov_path(&m, *y, *eta, t_star, *eps, *steps)?;
            let mut em = Emitter::new(cli.format, header, vec!["t", "arg_det2"]);
            em.line(format!("{}", path.index));
            for (t, a) in &path.samples {
                em.row(vec![*t, *a]);
            }
            em.write(em_out).map_err(io_err)?;
        }
        Cmd::Symbol {
            model,
            y,
            eta,
            eps,
            t,
            t0,
            t1,
            samples,
        } => {
            let m = MetricModel::from_json_file(&model.model)?;
            let ts = match (t, t1) {
                (Some(t), _) => vec![*t],
                (None, Some(t1)) => grid(*t0, *t1, *samples),
                (None, None) => {
                    return Err(WfError::ConfigParse(
                        "symbol needs either --t or --t1".into(),
                    ));
                }
            };
            let a = symbolcalc::subprincipal_on_grid(&m, *y, *eta, *eps, &ts, 1e-9, 0.0)?;
            let mut em = Emitter::new(
                cli.format,
                header,
                vec!["t", "re_a_m1", "im_a_m1", "fte_residual"],
            );
            for (i, &tv) in ts.iter().enumerate() {
                let r = if tv == 0.0 {
                    0.0
                } else {
                    symbolcalc::fte_residual(&m, *y, *eta, *eps, tv)?.norm()
                };
                em.row(vec![tv, a[i].re, a[i].im, r]);
            }
            em.write(em_out).map_err(io_err)?;
        }
        Cmd::IdentitySymbol { d, eps, h, kmax } => {
            let mut em = Emitter::new(cli.format, header, vec!["k", "re_s", "im_s"]);
            for k in 0..=*kmax {
                let v = symbolcalc::identity_symbol(*d, *eps, k, *h)?;
                em.row(vec![k as f64, v.re, v.im]);
            }
            em.write(em_out).map_err(io_err)?;
        }
        Cmd::Kernel {
            model,
            x,
            y,
            eps,
            depth,
            regulator,
            angular_nodes,
            radial_nodes,
            t0,
            t1,
            samples,
        } => {
            let m = MetricModel::from_json_file(&model.model)?;
            let ts = match t1 {
                Some(t1) => grid(*t0, *t1, *samples),
                None => vec![*t0],
            };
            let spectral_ref = match m.kind {
                crate::geometry::ModelKind::Sphere2 { radius } => {
                    Some(SpectralReference::auto(radius, *regulator, false))
                }
                _ => None,
            };
            let mut em = Emitter::new(
                cli.format,
                header,
                vec!["t", "re_u_osc", "im_u_osc", "re_u_spec", "im_u_spec", "abs_diff"],
            );
            for &tv in &ts {
                let mut req = KernelRequest::new(tv, *x, *y);
                req.eps = *eps;
                req.symbol_depth = *depth;
                req.regulator_scale = *regulator;
                req.angular_nodes = *angular_nodes;
                req.radial_nodes = *radial_nodes;
                let osc = kernel_oscillatory(&m, &req)?;
                let spec = match &spectral_ref {
                    Some(r) => kernel_spectral(&m, r, tv, *x, *y, *regulator)?,
                    None => C64::new(f64::NAN, f64::NAN),
                };
                em.row(vec![
                    tv,
                    osc.re,
                    osc.im,
                    spec.re,
                    spec.im,
                    (osc - spec).norm(),
                ]);
            }
            em.write(em_out).map_err(io_err)?;
        }
        Cmd::Weyl {
            lambda_min,
            lambda_max,
            samples,
            sigma,
        } => {
            let lams = grid(*lambda_min, *lambda_max, *samples);
            let l_max = (*lambda_max + 10.0 * *sigma) as usize + 4;
            let vals = spectral::mollified_counting_derivative(l_max, &lams, *sigma)?;
            let c1 = spectral::weyl_coefficients(2, 2.0).c_dm1;
            let mut em = Emitter::new(
                cli.format,
                header,
                vec!["lambda", "n_prime_mollified", "c1_lambda", "rel_err"],
            );
            for (i, &lam) in lams.iter().enumerate() {
                em.row(vec![
                    lam,
                    vals[i],
                    c1 * lam,
                    (vals[i] - c1 * lam) / (c1 * lam),
                ]);
            }
            em.write(em_out).map_err(io_err)?;
        }
    }
    Ok(())
}

fn refine_loop_time(model: &MetricModel, y: Pt, eta: Pt, t_guess: f64) -> Result<f64> {
    let sep = |t: f64| -> f64 {
        match flow::flow_state(model, y, eta, t) {
            Ok(s) => {
                let d = [s.x_star[0] - y[0], s.x_star[1] - y[1]];
                (d[0] * d[0] + d[1] * d[1]).sqrt()
            }
            Err(_) => f64::INFINITY,
        }
    };
    let (mut a, mut b) = (t_guess - 1e-3, t_guess + 1e-3);
    for _ in 0..200 {
        let m1 = a + 0.381_966_011 * (b - a);
        let m2 = b - 0.381_966_011 * (b - a);
        if sep(m1) < sep(m2) {
            b = m2;
        } else {
            a = m1;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    let t = 0.5 * (a + b);
    if sep(t) < sep(t_guess) { Ok(t) } else { Ok(t_guess) }
}

fn io_err(e: std::io::Error) -> WfError {
    WfError::ConfigParse(format!("output error: {e}"))
}

/// Entry point used by the binary and by tests; returns the process exit code.
pub fn run_with_output(argv: &[String], out: &mut (dyn Write + Send)) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(out, "{e}");
            return 2;
        }
    };
    let threads = std::env::var("WAVEFRONT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .or(cli.threads);
    let body = |cli: &Cli, out: &mut dyn Write| -> i32 {
        let result = match &cli.out {
            Some(path) => {
                let mut f = match std::fs::File::create(path) {
                    Ok(f) => f,
                    Err(e) => {
                        eprintln!("wavefront-kit: cannot open {}: {e}", path.display());
                        return 2;
                    }
                };
                execute(cli, &mut f)
            }
            None => execute(cli, out),
        };
        match result {
            Ok(()) => 0,
            Err(e @ (WfError::ModelLoad(_) | WfError::ConfigParse(_))) => {
                eprintln!("wavefront-kit: {e}");
                2
            }
            Err(e) => {
                eprintln!("wavefront-kit: {e}");
                1
            }
        }
    };
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build();
            match pool {
                Ok(p) => p.install(|| body(&cli, out)),
                Err(e) => {
                    eprintln!("wavefront-kit: thread pool: {e}");
                    1
                }
            }
        }
        _ => body(&cli, out),
    }
}

pub fn run(argv: &[String]) -> i32 {
    let mut stdout = std::io::stdout();
    run_with_output(argv, &mut stdout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_model(name: &str, body: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("wavefront-kit-cli-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, body).unwrap();
        path
    }

    fn run_capture(args: &[&str]) -> (i32, String) {
        let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let mut buf = Vec::new();
        let code = run_with_output(&argv, &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn maslov_prints_two() {
        let model = write_model("sphere.json", r#"{"kind":"sphere2","params":{"radius":1.0}}"#);
        let (code, out) = run_capture(&[
            "wavefront-kit",
            "maslov",
            "--model",
            model.to_str().unwrap(),
            "--eta",
            "1,0",
            "--T",
            "6.2831853",
            "--eps",
            "1",
        ]);
        assert_eq!(code, 0, "{out}");
        assert_eq!(out.lines().next().unwrap().trim(), "2");
    }

    #[test]
    fn symbol_hyperbolic_value() {
        let model = write_model(
            "hyperbolic.json",
            r#"{"kind":"hyperbolic2","params":{"scale":1.0}}"#,
        );
        let (code, out) = run_capture(&[
            "wavefront-kit",
            "symbol",
            "--model",
            model.to_str().unwrap(),
            "--eps",
            "0",
            "--t",
            "1.0",
            "--eta",
            "1,0",
        ]);
        assert_eq!(code, 0, "{out}");
        let last = out.lines().last().unwrap();
        let cells: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
        let want = -(3.0 + 1.0f64.tanh()) / 24.0;
        assert!((cells[2] - want).abs() < 1e-7, "{} vs {want}", cells[2]);
        assert!(cells[1].abs() < 1e-8);
        assert!(cells[3] < 1e-6);
    }

    #[test]
    fn missing_model_file_exits_two() {
        let (code, _) = run_capture(&[
            "wavefront-kit",
            "flow",
            "--model",
            "/nonexistent/model.json",
            "--eta",
            "1,0",
            "--t1",
            "1.0",
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn byte_identical_reruns() {
        let model = write_model("torus.json", r#"{"kind":"flat_torus2","params":{"lx":2.0,"ly":2.0}}"#);
        let args = [
            "wavefront-kit",
            "flow",
            "--model",
            model.to_str().unwrap(),
            "--eta",
            "0.6,0.8",
            "--t1",
            "1.5",
            "--samples",
            "9",
            "--seed",
            "42",
        ];
        let (c1, o1) = run_capture(&args);
        let (c2, o2) = run_capture(&args);
        assert_eq!(c1, 0);
        assert_eq!(c2, 0);
        assert_eq!(o1, o2);
        assert!(o1.contains("seed=42"));
    }

    #[test]
    fn identity_symbol_table_output() {
        let (code, out) = run_capture(&[
            "wavefront-kit",
            "identity-symbol",
            "--d",
            "2",
            "--kmax",
            "3",
        ]);
        assert_eq!(code, 0);
        let last = out.lines().last().unwrap();
        let cells: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cells[1] - 0.125).abs() < 1e-12, "{out}");
    }

    #[test]
    fn json_output_parses() {
        let (code, out) = run_capture(&[
            "wavefront-kit",
            "weyl",
            "--samples",
            "3",
            "--lambda-max",
            "60",
            "--format",
            "json",
        ]);
        assert_eq!(code, 0);
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    }
}
