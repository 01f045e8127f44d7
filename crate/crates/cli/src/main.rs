//! Command-line interface: rate functions, price asymptotes, equivalent
//! volatilities, optimal paths, region classification, symmetry mapping,
//! Monte Carlo pricing, and one-command benchmark-table reproduction.
//!
//! Exit codes: 0 success, 2 input/usage error, 3 numerical non-convergence.

mod tables;

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use asianray::bs_rate::{optimal_path, solve_fwd_rate, RateBranch};
use asianray::domain::{classify, ContractSpec, Family, ModelSpec, Regime, Side, VolSpec};
use asianray::error::Error;
use asianray::expansions::{classify_region_with, RegionLabel};
use asianray::floating::{
    floating_rate_bs, generalized_rate_bs, symmetry_map, GenRegion, SymmetryDirection,
};
use asianray::lv_rate;
use asianray::mc::{price_mc, rate_convergence_probe, Averaging, McConfig, Scheme};
use asianray::pricing::{
    asymptotic_price, equivalent_vols, floating_price_approx, otm_rate, smile_expansion,
    PriceMethod,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "asianray",
    version,
    about = "Short-maturity asymptotics for forward-start Asian options"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Write the output to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Read the command and its flags from a JSON job file
    /// `{"command": "...", "args": {"flag": value, ...}}`.
    #[arg(long, global = true)]
    job: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Args)]
struct ModelArgs {
    /// Spot price.
    #[arg(long, default_value_t = 100.0)]
    s0: f64,
    /// Risk-free rate (per year).
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    /// Dividend yield (per year).
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    /// Volatility level: the constant volatility, or the `a` parameter of a
    /// local-volatility family.
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    /// Volatility model.
    #[arg(long, value_enum, default_value = "constant")]
    vol_model: VolModel,
    /// `b` parameter of the shifted-reciprocal family
    /// `sigma(s) = clamp(a + b*S0/s, lo, hi)`.
    #[arg(long, default_value_t = 0.1)]
    vol_b: f64,
    /// Exponent of the clamped-CEV family
    /// `sigma(s) = clamp(a*(s/S0)^(e-1), lo, hi)`.
    #[arg(long, default_value_t = 0.5)]
    vol_exponent: f64,
    /// Lower clamp for the local-volatility families.
    #[arg(long)]
    vol_lo: Option<f64>,
    /// Upper clamp for the local-volatility families.
    #[arg(long)]
    vol_hi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VolModel {
    Constant,
    ShiftedReciprocal,
    ClampedCev,
}

impl ModelArgs {
    fn build(&self) -> Result<ModelSpec, Error> {
        let s0 = self.s0;
        let a = self.sigma;
        match self.vol_model {
            VolModel::Constant => ModelSpec::black_scholes(s0, self.r, self.q, a),
            VolModel::ShiftedReciprocal => {
                let lo = self.vol_lo.unwrap_or(a);
                let hi = self.vol_hi.unwrap_or(a + 5.0 * self.vol_b);
                let b = self.vol_b;
                ModelSpec::new(
                    s0,
                    self.r,
                    self.q,
                    VolSpec::LocalVol {
                        sigma_fn: Arc::new(move |s: f64| (a + b * s0 / s).clamp(lo, hi)),
                        sigma_lo: lo,
                        sigma_hi: hi,
                    },
                )
            }
            VolModel::ClampedCev => {
                let lo = self.vol_lo.unwrap_or(a / 3.0);
                let hi = self.vol_hi.unwrap_or(3.0 * a);
                let e = self.vol_exponent;
                ModelSpec::new(
                    s0,
                    self.r,
                    self.q,
                    VolSpec::LocalVol {
                        sigma_fn: Arc::new(move |s: f64| {
                            (a * (s / s0).powf(e - 1.0)).clamp(lo, hi)
                        }),
                        sigma_lo: lo,
                        sigma_hi: hi,
                    },
                )
            }
        }
    }

    fn echo(&self, args: &mut Map<String, Value>) {
        args.insert("s0".into(), json!(self.s0));
        args.insert("r".into(), json!(self.r));
        args.insert("q".into(), json!(self.q));
        args.insert("sigma".into(), json!(self.sigma));
        if self.vol_model != VolModel::Constant {
            let name = match self.vol_model {
                VolModel::Constant => "constant",
                VolModel::ShiftedReciprocal => "shifted-reciprocal",
                VolModel::ClampedCev => "clamped-cev",
            };
            args.insert("vol-model".into(), json!(name));
            args.insert("vol-b".into(), json!(self.vol_b));
            args.insert("vol-exponent".into(), json!(self.vol_exponent));
            if let Some(lo) = self.vol_lo {
                args.insert("vol-lo".into(), json!(lo));
            }
            if let Some(hi) = self.vol_hi {
                args.insert("vol-hi".into(), json!(hi));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Fixed,
    Floating,
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Call,
    Put,
}

#[derive(Debug, Clone, Args)]
struct ContractArgs {
    /// Contract family.
    #[arg(long, value_enum, default_value = "fixed")]
    family: FamilyArg,
    /// Call or put.
    #[arg(long, value_enum, default_value = "call")]
    side: SideArg,
    /// Cash strike K (fixed strike and generalized families).
    #[arg(long)]
    strike: Option<f64>,
    /// Strike over spot; shorthand for `--strike (k_over_s0 * s0)`.
    #[arg(long)]
    k_over_s0: Option<f64>,
    /// Floating strike multiplier.
    #[arg(long)]
    kappa: Option<f64>,
    /// Maturity in years.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Forward-start fraction; the averaging window is [tau*T, T].
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
}

impl ContractArgs {
    fn side(&self) -> Side {
        match self.side {
            SideArg::Call => Side::Call,
            SideArg::Put => Side::Put,
        }
    }

    fn strike(&self, s0: f64) -> Option<f64> {
        self.strike.or(self.k_over_s0.map(|k| k * s0))
    }

    fn build(&self, s0: f64) -> Result<ContractSpec, Error> {
        match self.family {
            FamilyArg::Fixed => {
                let k = self.strike(s0).ok_or_else(|| {
                    Error::InvalidInput(
                        "fixed-strike contracts need --strike or --k-over-s0".into(),
                    )
                })?;
                ContractSpec::fixed_strike(self.side(), k, self.t, self.tau)
            }
            FamilyArg::Floating => {
                let kappa = self.kappa.ok_or_else(|| {
                    Error::InvalidInput("floating-strike contracts need --kappa".into())
                })?;
                ContractSpec::floating_strike(self.side(), kappa, self.t, self.tau)
            }
            FamilyArg::Generalized => {
                let kappa = self.kappa.ok_or_else(|| {
                    Error::InvalidInput("generalized contracts need --kappa".into())
                })?;
                let k = self.strike(s0).ok_or_else(|| {
                    Error::InvalidInput(
                        "generalized contracts need --strike or --k-over-s0".into(),
                    )
                })?;
                ContractSpec::generalized(self.side(), kappa, k, self.t)
            }
        }
    }

    fn echo(&self, args: &mut Map<String, Value>) {
        let family = match self.family {
            FamilyArg::Fixed => "fixed",
            FamilyArg::Floating => "floating",
            FamilyArg::Generalized => "generalized",
        };
        args.insert("family".into(), json!(family));
        args.insert(
            "side".into(),
            json!(match self.side {
                SideArg::Call => "call",
                SideArg::Put => "put",
            }),
        );
        if let Some(k) = self.strike {
            args.insert("strike".into(), json!(k));
        }
        if let Some(k) = self.k_over_s0 {
            args.insert("k-over-s0".into(), json!(k));
        }
        if let Some(k) = self.kappa {
            args.insert("kappa".into(), json!(k));
        }
        args.insert("t".into(), json!(self.t));
        args.insert("tau".into(), json!(self.tau));
    }
}

#[derive(Debug, Clone, Args)]
struct McArgs {
    /// Also price with the Monte Carlo oracle.
    #[arg(long)]
    mc: bool,
    /// Monte Carlo paths.
    #[arg(long, default_value_t = 1_000_000)]
    paths: usize,
    /// Time steps on [0, T].
    #[arg(long, default_value_t = 365)]
    steps: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Disable antithetic variates.
    #[arg(long)]
    no_antithetic: bool,
    /// Path scheme: exact GBM increments (constant vol) or log-space Euler.
    #[arg(long, value_enum, default_value = "exact")]
    scheme: SchemeArg,
    /// Window-average estimator.
    #[arg(long, value_enum, default_value = "trapezoid")]
    averaging: AveragingArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Exact,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AveragingArg {
    Trapezoid,
    Discrete,
}

impl McArgs {
    fn config(&self) -> McConfig {
        McConfig {
            n_paths: self.paths,
            n_steps: self.steps,
            seed: self.seed,
            antithetic: !self.no_antithetic,
            scheme: match self.scheme {
                SchemeArg::Exact => Scheme::ExactGbm,
                SchemeArg::Euler => Scheme::EulerLogSpace,
            },
            averaging: match self.averaging {
                AveragingArg::Trapezoid => Averaging::Trapezoid,
                AveragingArg::Discrete => Averaging::DiscreteFixings,
            },
        }
    }

    fn echo(&self, args: &mut Map<String, Value>) {
        if self.mc {
            args.insert("mc".into(), json!(true));
            args.insert("paths".into(), json!(self.paths));
            args.insert("steps".into(), json!(self.steps));
            args.insert("seed".into(), json!(self.seed));
            if self.no_antithetic {
                args.insert("no-antithetic".into(), json!(true));
            }
            if self.scheme == SchemeArg::Euler {
                args.insert("scheme".into(), json!("euler"));
            }
            if self.averaging == AveragingArg::Discrete {
                args.insert("averaging".into(), json!("discrete"));
            }
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rate function with solver internals.
    Rate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        contract: ContractArgs,
        /// Inner grid size for local-volatility rate functions.
        #[arg(long, default_value_t = lv_rate::DEFAULT_N_GRID)]
        n_grid: usize,
    },
    /// Asymptotic price for the contract's regime; `--mc` adds the oracle.
    Price {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Equivalent log-normal/Bachelier volatilities and the smile expansion.
    Vol {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        contract: ContractArgs,
    },
    /// Optimal-path samples (t, f(t)) for plotting.
    Path {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        contract: ContractArgs,
        #[arg(long, default_value_t = 200)]
        n_grid: usize,
    },
    /// Region of the (tau, x) plane and which expansion applies.
    Region {
        /// Log strike x = log(K/S0).
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 0.1)]
        aatm_threshold: f64,
        #[arg(long, default_value_t = 2.0)]
        dotm_threshold: f64,
    },
    /// Floating/fixed dual contract under the exact symmetry relation.
    Symmetry {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        contract: ContractArgs,
    },
    /// Monte Carlo convergence probe: -T log(price) down a maturity ladder
    /// for an OTM contract, to compare against the rate function.
    Probe {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Comma-separated maturity ladder.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.125")]
        ladder: Vec<f64>,
    },
    /// Reproduce a benchmark table (1, 2, or 3).
    Table {
        /// Which table.
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[command(flatten)]
        mc: McArgs,
    },
}

/// A rendered command result: an inputs echo (a valid job spec), outputs,
/// and diagnostics.
struct Rendered {
    inputs: Value,
    outputs: Value,
    diagnostics: Value,
    /// Tabular form: header plus rows (a single row for scalar commands).
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn scalar_table(outputs: &Value) -> (Vec<String>, Vec<Vec<String>>) {
    let obj = outputs.as_object().expect("scalar outputs are objects");
    let header: Vec<String> = obj.keys().cloned().collect();
    let row: Vec<String> = obj
        .values()
        .map(|v| match v {
            Value::String(s) => s.clone(),
            Value::Null => "-".to_string(),
            other => other.to_string(),
        })
        .collect();
    (header, vec![row])
}

fn job_inputs(command: &str, args: Map<String, Value>) -> Value {
    json!({"command": command, "args": Value::Object(args)})
}

fn run_command(cmd: &Command) -> Result<Rendered, Error> {
    match cmd {
        Command::Rate {
            model,
            contract,
            n_grid,
        } => run_rate(model, contract, *n_grid),
        Command::Price {
            model,
            contract,
            mc,
        } => run_price(model, contract, mc),
        Command::Vol { model, contract } => run_vol(model, contract),
        Command::Path {
            model,
            contract,
            n_grid,
        } => run_path(model, contract, *n_grid),
        Command::Region {
            x,
            tau,
            aatm_threshold,
            dotm_threshold,
        } => run_region(*x, *tau, *aatm_threshold, *dotm_threshold),
        Command::Symmetry { model, contract } => run_symmetry(model, contract),
        Command::Probe {
            model,
            contract,
            mc,
            ladder,
        } => run_probe(model, contract, mc, ladder),
        Command::Table { which, mc } => run_table(*which, mc),
    }
}

fn run_probe(
    margs: &ModelArgs,
    cargs: &ContractArgs,
    mcargs: &McArgs,
    ladder: &[f64],
) -> Result<Rendered, Error> {
    let model = margs.build()?;
    let contract = cargs.build(model.s0)?;
    let mut args = Map::new();
    margs.echo(&mut args);
    cargs.echo(&mut args);
    args.insert("paths".into(), json!(mcargs.paths));
    args.insert("steps".into(), json!(mcargs.steps));
    args.insert("seed".into(), json!(mcargs.seed));
    args.insert(
        "ladder".into(),
        json!(ladder
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",")),
    );
    let points = rate_convergence_probe(&model, &contract, ladder, &mcargs.config())?;
    let header = vec!["t".to_string(), "minus_t_log_price".to_string()];
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|(t, v)| vec![t.to_string(), v.to_string()])
        .collect();
    let rate = otm_rate(&model, &contract).ok();
    let outputs = json!({
        "t": points.iter().map(|(t, _)| *t).collect::<Vec<_>>(),
        "minus_t_log_price": points.iter().map(|(_, v)| *v).collect::<Vec<_>>(),
    });
    Ok(Rendered {
        inputs: job_inputs("probe", args),
        outputs,
        diagnostics: json!({"i_fwd": rate}),
        header,
        rows,
    })
}

fn run_rate(margs: &ModelArgs, cargs: &ContractArgs, n_grid: usize) -> Result<Rendered, Error> {
    let model = margs.build()?;
    let contract = cargs.build(model.s0)?;
    let mut args = Map::new();
    margs.echo(&mut args);
    cargs.echo(&mut args);

    let mut diagnostics = Map::new();
    let outputs = match (contract.family, model.is_constant_vol()) {
        (Family::FixedStrike, true) => {
            let k = contract.strike_k.expect("validated") / model.s0;
            let r = solve_fwd_rate(k, contract.tau, model.sigma_spot())?;
            diagnostics.insert("residual".into(), json!(r.residual));
            let (beta, xi) = match r.branch {
                RateBranch::Beta => (Some(r.beta_or_xi), None),
                RateBranch::Xi => (None, Some(r.beta_or_xi)),
            };
            json!({
                "family": "fixed",
                "k_over_s0": k,
                "tau": contract.tau,
                "c": r.c,
                "beta": beta,
                "xi": xi,
                "j_fwd": r.j_fwd,
                "i_fwd": r.i_fwd,
            })
        }
        (Family::FloatingStrike, true) => {
            let kappa = contract.kappa.expect("validated");
            let i_f = floating_rate_bs(kappa, contract.tau, model.sigma_spot())?;
            json!({
                "family": "floating",
                "kappa": kappa,
                "tau": contract.tau,
                "j_bs": asianray::bs_rate::j_bs(kappa)?,
                "i_f": i_f,
            })
        }
        (Family::Generalized, true) => {
            let kappa = contract.kappa.expect("validated");
            let k = contract.strike_k.expect("validated") / model.s0;
            let g = generalized_rate_bs(kappa, k, model.sigma_spot())?;
            diagnostics.insert("residuals".into(), json!(g.residuals));
            diagnostics.insert("ambiguous".into(), json!(g.ambiguous));
            json!({
                "family": "generalized",
                "kappa": kappa,
                "k_over_s0": k,
                "region": match g.region {
                    GenRegion::A => "A",
                    GenRegion::B => "B",
                    GenRegion::AtmLine => "ATM-line",
                },
                "beta": g.beta,
                "gamma": g.gamma,
                "xi": g.xi,
                "eta": g.eta,
                "branch_index": g.branch_index,
                "j_g": g.j_g,
                "i_g": g.i_g,
            })
        }
        (Family::Generalized, false) => {
            return Err(Error::RegimeUnsupported(
                "generalized rate functions require constant volatility".into(),
            ));
        }
        (family, false) => {
            args.insert("n-grid".into(), json!(n_grid));
            let kind = if family == Family::FixedStrike {
                lv_rate::AverageKind::FixedAverage
            } else {
                lv_rate::AverageKind::FloatingAverage
            };
            let k = if family == Family::FixedStrike {
                contract.strike_k.expect("validated")
            } else {
                contract.kappa.expect("validated")
            };
            let r = lv_rate::fwd_rate_with(&model, k, contract.tau, kind, n_grid)?;
            diagnostics.insert("outer_iterations".into(), json!(r.outer_iterations));
            diagnostics.insert("corner_slope_gap".into(), json!(r.corner_slope_gap));
            diagnostics.insert(
                "constraint_residual".into(),
                json!(r.path.constraint_residual),
            );
            json!({
                "family": if family == Family::FixedStrike { "fixed" } else { "floating" },
                "tau": contract.tau,
                "c_star": r.c_star,
                "inner_value": r.inner_value,
                "i_fwd": r.i_fwd,
                "n_grid": n_grid,
            })
        }
    };
    let (header, rows) = scalar_table(&outputs);
    Ok(Rendered {
        inputs: job_inputs("rate", args),
        outputs,
        diagnostics: Value::Object(diagnostics),
        header,
        rows,
    })
}

fn run_price(margs: &ModelArgs, cargs: &ContractArgs, mcargs: &McArgs) -> Result<Rendered, Error> {
    let model = margs.build()?;
    let contract = cargs.build(model.s0)?;
    let mut args = Map::new();
    margs.echo(&mut args);
    cargs.echo(&mut args);
    mcargs.echo(&mut args);

    let res = asymptotic_price(&model, &contract)?;
    let mut outputs = Map::new();
    outputs.insert(
        "regime".into(),
        json!(match res.regime.label {
            Regime::Otm => "OTM",
            Regime::Atm => "ATM",
            Regime::Itm => "ITM",
        }),
    );
    outputs.insert("price".into(), json!(res.price));
    outputs.insert("log_price_slope".into(), json!(res.log_price_slope));
    outputs.insert("sqrt_t_coeff".into(), json!(res.sqrt_t_coeff));
    outputs.insert("sigma_ln".into(), json!(res.sigma_ln));
    outputs.insert("sigma_n".into(), json!(res.sigma_n));
    outputs.insert(
        "method".into(),
        json!(match res.method {
            PriceMethod::OtmExponentialOrder => "otm-exponential-order-of-magnitude",
            PriceMethod::AtmSqrtT => "atm-sqrt-t",
            PriceMethod::ItmParityExpansion => "itm-parity-expansion",
        }),
    );
    // Floating contracts additionally get the Bachelier price approximation
    // on the spread forward (the benchmark-table estimator); the put follows
    // by parity.
    if contract.family == Family::FloatingStrike {
        let kappa = contract.kappa.expect("validated");
        let call = floating_price_approx(&model, kappa, contract.tau, contract.maturity_t)?;
        let approx = match contract.side {
            Side::Call => call,
            Side::Put => {
                let t = contract.maturity_t;
                let f_f = kappa * model.s0 * ((model.r - model.q) * t).exp()
                    - asianray::domain::forward_average(&model, t, contract.tau);
                call - (-model.r * t).exp() * f_f
            }
        };
        outputs.insert("bachelier_approx".into(), json!(approx));
    }
    let mut diagnostics = Map::new();
    if mcargs.mc {
        let est = price_mc(&model, &contract, &mcargs.config())?;
        outputs.insert("mc_price".into(), json!(est.price));
        outputs.insert("mc_std_error".into(), json!(est.std_error));
        diagnostics.insert("mc_paths_used".into(), json!(est.n_paths_used));
    }
    let outputs = Value::Object(outputs);
    let (header, rows) = scalar_table(&outputs);
    Ok(Rendered {
        inputs: job_inputs("price", args),
        outputs,
        diagnostics: Value::Object(diagnostics),
        header,
        rows,
    })
}

fn run_vol(margs: &ModelArgs, cargs: &ContractArgs) -> Result<Rendered, Error> {
    let model = margs.build()?;
    let contract = cargs.build(model.s0)?;
    let mut args = Map::new();
    margs.echo(&mut args);
    cargs.echo(&mut args);

    let mny = classify(&model, &contract);
    let rate = if mny.label == Regime::Otm {
        otm_rate(&model, &contract)?
    } else {
        0.0
    };
    let (sigma_ln, sigma_n) = equivalent_vols(&model, &contract, rate)?;
    let smile = if contract.family == Family::FixedStrike {
        Some(smile_expansion(
            mny.log_strike_x,
            contract.tau,
            model.sigma_spot(),
        ))
    } else {
        None
    };
    let outputs = json!({
        "regime": mny.label.to_string(),
        "log_strike_x": mny.log_strike_x,
        "rate": if mny.label == Regime::Otm { json!(rate) } else { Value::Null },
        "sigma_ln": sigma_ln,
        "sigma_n": sigma_n,
        "smile_expansion": smile,
    });
    let (header, rows) = scalar_table(&outputs);
    Ok(Rendered {
        inputs: job_inputs("vol", args),
        outputs,
        diagnostics: json!({}),
        header,
        rows,
    })
}

fn run_path(margs: &ModelArgs, cargs: &ContractArgs, n_grid: usize) -> Result<Rendered, Error> {
    let model = margs.build()?;
    let contract = cargs.build(model.s0)?;
    let mut args = Map::new();
    margs.echo(&mut args);
    cargs.echo(&mut args);
    args.insert("n-grid".into(), json!(n_grid));

    let (sample, diag) = if model.is_constant_vol() {
        match contract.family {
            Family::FixedStrike => {
                let k = contract.strike_k.expect("validated") / model.s0;
                let p = optimal_path(k, contract.tau, n_grid)?;
                let d = json!({"constraint_residual": p.constraint_residual, "corner": p.corner});
                (p, d)
            }
            _ => {
                return Err(Error::RegimeUnsupported(
                    "closed-form optimal paths cover fixed-strike contracts; floating paths \
                     are available through the local-volatility solver (--vol-model)"
                        .into(),
                ))
            }
        }
    } else {
        let (kind, k) = match contract.family {
            Family::FixedStrike => (
                lv_rate::AverageKind::FixedAverage,
                contract.strike_k.expect("validated"),
            ),
            Family::FloatingStrike => (
                lv_rate::AverageKind::FloatingAverage,
                contract.kappa.expect("validated"),
            ),
            Family::Generalized => {
                return Err(Error::RegimeUnsupported(
                    "no optimal path is implemented for generalized contracts".into(),
                ))
            }
        };
        let r = lv_rate::fwd_rate_with(&model, k, contract.tau, kind, n_grid)?;
        let d = json!({
            "constraint_residual": r.path.constraint_residual,
            "corner": r.path.corner,
            "c_star": r.c_star,
            "i_fwd": r.i_fwd,
        });
        (r.path, d)
    };

    let header = vec!["t".to_string(), "f".to_string()];
    let rows: Vec<Vec<String>> = sample
        .grid
        .iter()
        .zip(&sample.values)
        .map(|(t, f)| vec![t.to_string(), f.to_string()])
        .collect();
    let outputs = json!({
        "t": sample.grid,
        "f": sample.values,
    });
    Ok(Rendered {
        inputs: job_inputs("path", args),
        outputs,
        diagnostics: diag,
        header,
        rows,
    })
}

fn run_region(x: f64, tau: f64, aatm: f64, dotm: f64) -> Result<Rendered, Error> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidInput(format!(
            "tau must lie in [0, 1), got {tau}"
        )));
    }
    let mut args = Map::new();
    args.insert("x".into(), json!(x));
    args.insert("tau".into(), json!(tau));
    args.insert("aatm-threshold".into(), json!(aatm));
    args.insert("dotm-threshold".into(), json!(dotm));
    let region = classify_region_with(x, tau, aatm, dotm);
    let outputs = json!({
        "label": match region.label {
            RegionLabel::TauAatm => "tau-aatm",
            RegionLabel::TauDotmCallWing => "tau-dotm-call-wing",
            RegionLabel::TauDotmPutRegion1 => "tau-dotm-put-region-1",
            RegionLabel::TauDotmPutRegion2 => "tau-dotm-put-region-2",
            RegionLabel::Intermediate => "intermediate",
        },
        "scale": region.scale,
        "kappa_ratio": region.kappa_ratio,
    });
    let (header, rows) = scalar_table(&outputs);
    Ok(Rendered {
        inputs: job_inputs("region", args),
        outputs,
        diagnostics: json!({}),
        header,
        rows,
    })
}

fn run_symmetry(margs: &ModelArgs, cargs: &ContractArgs) -> Result<Rendered, Error> {
    let model = margs.build()?;
    let contract = cargs.build(model.s0)?;
    let mut args = Map::new();
    margs.echo(&mut args);
    cargs.echo(&mut args);

    let mapped = symmetry_map(&model, &contract)?;
    let outputs = json!({
        "direction": match mapped.direction {
            SymmetryDirection::FloatingToFixed => "floating-to-fixed",
            SymmetryDirection::FixedToFloating => "fixed-to-floating",
        },
        "family": match mapped.contract.family {
            Family::FixedStrike => "fixed",
            Family::FloatingStrike => "floating",
            Family::Generalized => "generalized",
        },
        "side": match mapped.contract.side {
            Side::Call => "call",
            Side::Put => "put",
        },
        "strike": mapped.contract.strike_k,
        "kappa": mapped.contract.kappa,
        "t": mapped.contract.maturity_t,
        "tau": mapped.contract.tau,
        "r": mapped.model.r,
        "q": mapped.model.q,
        "price_scale": mapped.price_scale,
    });
    let (header, rows) = scalar_table(&outputs);
    Ok(Rendered {
        inputs: job_inputs("symmetry", args),
        outputs,
        diagnostics: json!({"note": "price(original) = price_scale * price(mapped)"}),
        header,
        rows,
    })
}

fn run_table(which: u8, mcargs: &McArgs) -> Result<Rendered, Error> {
    let mut args = Map::new();
    args.insert("which".into(), json!(which));
    mcargs.echo(&mut args);

    let (header, rows) = match which {
        1 | 2 => tables::run_rate_table(which)?,
        3 => {
            let mc = mcargs.mc.then_some(tables::TableMc {
                n_paths: mcargs.paths,
                n_steps: mcargs.steps,
                seed: mcargs.seed,
            });
            tables::run_bench_table(mc.as_ref())?
        }
        _ => unreachable!("validated by clap"),
    };
    let outputs = tables::table_json(&header, &rows);
    Ok(Rendered {
        inputs: job_inputs("table", args),
        outputs,
        diagnostics: json!({}),
        header,
        rows,
    })
}

fn render(format: Format, r: &Rendered) -> String {
    match format {
        Format::Json => {
            let envelope = json!({
                "inputs": r.inputs,
                "outputs": r.outputs,
                "diagnostics": r.diagnostics,
                "version": env!("CARGO_PKG_VERSION"),
            });
            let mut s = serde_json::to_string_pretty(&envelope).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&r.header.join(","));
            s.push('\n');
            for row in &r.rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
        Format::Text => {
            if r.rows.len() == 1 {
                let mut s = String::new();
                for (k, v) in r.header.iter().zip(&r.rows[0]) {
                    s.push_str(&format!("{k} = {v}\n"));
                }
                s
            } else {
                let mut s = String::new();
                s.push_str(&r.header.join("  "));
                s.push('\n');
                for row in &r.rows {
                    s.push_str(&row.join("  "));
                    s.push('\n');
                }
                s
            }
        }
    }
}

/// Expands a JSON job file into an argv vector mirroring the flags
/// one-to-one.
fn argv_from_job(path: &PathBuf, format: Format) -> Result<Vec<String>, Error> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::InvalidInput(format!("cannot read job file {}: {e}", path.display()))
    })?;
    let job: Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("job file is not valid JSON: {e}")))?;
    let command = job
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidInput("job file needs a \"command\" string".into()))?;
    let mut argv = vec!["asianray".to_string()];
    match format {
        Format::Text => {}
        Format::Csv => argv.extend(["--format".into(), "csv".into()]),
        Format::Json => argv.extend(["--format".into(), "json".into()]),
    }
    argv.push(command.to_string());
    if command == "table" {
        let which = job
            .pointer("/args/which")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidInput("table jobs need args.which".into()))?;
        argv.push(which.to_string());
    }
    if let Some(Value::Object(map)) = job.get("args") {
        for (key, value) in map {
            if key == "which" {
                continue;
            }
            match value {
                Value::Bool(true) => argv.push(format!("--{key}")),
                Value::Bool(false) | Value::Null => {}
                Value::String(s) => {
                    argv.push(format!("--{key}"));
                    argv.push(s.clone());
                }
                other => {
                    argv.push(format!("--{key}"));
                    argv.push(other.to_string());
                }
            }
        }
    }
    Ok(argv)
}

fn main() {
    if let Ok(threads) = std::env::var("ASIANRAY_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }

    let cli = Cli::parse();
    let cli = if let Some(job) = &cli.job {
        match argv_from_job(job, cli.format) {
            Ok(argv) => match Cli::try_parse_from(&argv) {
                Ok(mut inner) => {
                    inner.output = cli.output.clone();
                    inner
                }
                Err(e) => {
                    eprintln!("{e}");
                    std::process::exit(2);
                }
            },
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(2);
            }
        }
    } else {
        cli
    };

    let Some(command) = &cli.command else {
        eprintln!("error: a command is required (try --help)");
        std::process::exit(2);
    };

    match run_command(command) {
        Ok(rendered) => {
            let text = render(cli.format, &rendered);
            match &cli.output {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        std::process::exit(2);
                    }
                }
                None => print!("{text}"),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_input_error() { 2 } else { 3 });
        }
    }
}
