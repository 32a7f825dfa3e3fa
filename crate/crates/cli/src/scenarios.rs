use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, Context as _, Result};
use serde::Serialize;

use pulsefront::fronts::{
    compute_pulsating_front, quench_scan, scan_e, verify_speed_identity, write_quench_csv,
    write_scan_csv, FrontOutcome, FrontSolution, IdentityReport,
};
use pulsefront::homogenize::{
    homogenization_sweep, solve_homogenized_front, write_sweep_csv, ShootingConfig,
};
use pulsefront::io::{
    write_eigenfunction, write_error_series, write_homogenized_front, write_profile, write_series,
    write_steady_state, PlotHeader,
};
use pulsefront::model::ProblemInstance;
use pulsefront::spectral::{
    decay_estimate, decay_root_mu, default_seeds, dirichlet_principal_eigen,
    find_periodic_steady_states, periodic_principal_eigen, stability_limit, DecayBranch,
    StabilityClass,
};
use pulsefront::stability::{
    build_supersub, global_stability_experiment, initialv2_experiment, poincare_spectrum,
    ComovingFrame, SuperSubKind,
};

use crate::config::{EigenBoundary, ExperimentConfig, StabilityDatum};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Front,
    Homogenize,
    Eigen,
    Steady,
    ScanE,
    Stability,
    Decay,
    QuenchScan,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::Front => "front",
            Self::Homogenize => "homogenize",
            Self::Eigen => "eigen",
            Self::Steady => "steady",
            Self::ScanE => "scan-e",
            Self::Stability => "stability",
            Self::Decay => "decay",
            Self::QuenchScan => "quench-scan",
        }
    }
}

/// Run state: summary lines, failed records and artifact plumbing.
pub struct Run {
    pub cfg: ExperimentConfig,
    pub hash: String,
    out: PathBuf,
    scenario: Scenario,
    pub summary: Vec<String>,
    pub failures: Vec<String>,
}

impl Run {
    pub fn new(cfg: ExperimentConfig, out: PathBuf, scenario: Scenario) -> Self {
        let hash = cfg.hash();
        Self {
            cfg,
            hash,
            out,
            scenario,
            summary: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn line(&mut self, s: String) {
        println!("{s}");
        self.summary.push(s);
    }

    fn fail(&mut self, s: String) {
        eprintln!("failed: {s}");
        self.failures.push(s);
    }

    fn header(&self, title: &str) -> PlotHeader {
        PlotHeader::new(title, &self.hash).note(format!("scenario={}", self.scenario.name()))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(format!("{}{name}", self.cfg.output.prefix))
    }

    fn write<F>(&self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .with_context(|| format!("writing {}", path.display()))
    }

    fn plot<F>(&self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        if self.cfg.output.plotdata {
            self.write(name, body)?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        if !self.cfg.output.json {
            return Ok(());
        }
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            config_hash: &'a str,
            scenario: &'a str,
            report: &'a T,
        }
        let text = serde_json::to_string_pretty(&Wrapped {
            config_hash: &self.hash,
            scenario: self.scenario.name(),
            report: value,
        })?;
        self.write(name, |w| writeln!(w, "{text}"))
    }

    fn csv<F>(&self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        body(&mut buf)?;
        let hash = self.hash.clone();
        self.write(name, move |w| {
            writeln!(w, "# config_hash={hash}")?;
            w.write_all(&buf)
        })
    }

    /// Writes the resolved configuration and the summary.
    pub fn finish(&self) -> Result<()> {
        let canonical = self.cfg.canonical();
        let hash = self.hash.clone();
        self.write("config.resolved.toml", |w| {
            writeln!(w, "# config_hash={hash}")?;
            write!(w, "{canonical}")
        })?;
        let lines = self.summary.clone();
        let failures = self.failures.clone();
        self.write("summary.txt", |w| {
            writeln!(w, "# config_hash={hash}")?;
            for l in &lines {
                writeln!(w, "{l}")?;
            }
            for f in &failures {
                writeln!(w, "failed: {f}")?;
            }
            Ok(())
        })
    }

    fn instance(&self) -> Result<ProblemInstance> {
        Ok(self.cfg.profile()?.instance()?)
    }

    pub fn execute(&mut self) -> Result<()> {
        match self.scenario {
            Scenario::Front => self.front(),
            Scenario::Homogenize => self.homogenize(),
            Scenario::Eigen => self.eigen(),
            Scenario::Steady => self.steady(),
            Scenario::ScanE => self.scan(),
            Scenario::Stability => self.stability(),
            Scenario::Decay => self.decay(),
            Scenario::QuenchScan => self.quench(),
        }
    }

    fn run_front(&self, inst: &ProblemInstance) -> Result<FrontOutcome> {
        let cfg = self.cfg.numerics.front_config();
        Ok(compute_pulsating_front(
            inst,
            &cfg,
            &self.cfg.budget.budget(),
        )?)
    }

    fn converged_front(&self, inst: &ProblemInstance) -> Result<FrontSolution> {
        match self.run_front(inst)? {
            FrontOutcome::Converged(s) => Ok(*s),
            FrontOutcome::Inconclusive(d) => Err(anyhow!("front run inconclusive: {}", d.reason)),
        }
    }

    fn front(&mut self) -> Result<()> {
        #[derive(Serialize)]
        struct FrontReport<'a> {
            period: f64,
            speed: f64,
            stationary: bool,
            estimate: Option<pulsefront::fronts::SpeedEstimate>,
            pulsating_error: f64,
            pulsating_defects: &'a [(f64, f64)],
            stationary_residual: f64,
            decay: Option<pulsefront::fronts::DecayFit>,
            identity: Option<IdentityReport>,
            h: f64,
            dt: f64,
            t_ref: f64,
        }
        let inst = self.instance()?;
        let l = inst.period;
        match self.run_front(&inst)? {
            FrontOutcome::Inconclusive(d) => {
                self.line(format!("front L={l} inconclusive reason={}", d.reason));
                self.json("front.json", &d)?;
            }
            FrontOutcome::Converged(sol) => {
                let homog = inst.homogenized(self.cfg.numerics.quad_n)?;
                let identity = if sol.stationary {
                    None
                } else {
                    verify_speed_identity(&sol, &homog).ok()
                };
                let est = sol.estimate;
                let mut s = format!(
                    "front L={l} class={} c={:.6} c_level={:.6} c_period={:.6} pulsating_error={:.3e}",
                    if sol.stationary { "stationary" } else { "propagating" },
                    sol.speed,
                    est.map_or(0.0, |e| e.c_level),
                    est.map_or(0.0, |e| e.c_period),
                    sol.pulsating_error
                );
                if let Some(id) = identity {
                    s.push_str(&format!(" c_identity={:.6}", id.c_identity));
                }
                if let Some(d) = sol.decay {
                    s.push_str(&format!(" mu1_fit={:.5} mu2_fit={:.5}", d.mu1, d.mu2));
                }
                self.line(s);
                let report = FrontReport {
                    period: l,
                    speed: sol.speed,
                    stationary: sol.stationary,
                    estimate: est,
                    pulsating_error: sol.pulsating_error,
                    pulsating_defects: &sol.pulsating_defects,
                    stationary_residual: sol.stationary_residual,
                    decay: sol.decay,
                    identity,
                    h: sol.h,
                    dt: sol.dt,
                    t_ref: sol.t_ref,
                };
                self.json("front.json", &report)?;
                let h = self
                    .header("pulsating front profile phi(xi, y), xi = x - c t")
                    .note(format!("L={l} c={}", sol.speed));
                self.plot("front_profile.dat", |w| write_profile(w, &sol.profile, &h))?;
                let h = self.header("level-set trajectory of u = 1/2");
                self.plot("front_level.dat", |w| {
                    write_series(
                        w,
                        &sol.level_trajectory,
                        [("t", "time"), ("x_half", "length")],
                        &h,
                    )
                })?;
            }
        }
        Ok(())
    }

    fn homogenize(&mut self) -> Result<()> {
        let inst = self.instance()?;
        let quad_n = self.cfg.numerics.quad_n;
        let homog = inst.homogenized(quad_n)?;
        let shoot = ShootingConfig {
            tol_c: self.cfg.homogenize.tol_c,
            ..ShootingConfig::default()
        };
        let front = solve_homogenized_front(&homog, &shoot)?;
        self.line(format!(
            "homogenize a_H={:.8} I_fbar={:.8} c0={:.8} lambda1={:.6} lambda2={:.6}",
            homog.a_h, homog.i_fbar, front.c0, front.lambda1, front.lambda2
        ));
        self.json("homogenized.json", &front)?;
        let h = self.header("averaged travelling wave phi0(xi), phi0(0) = 1/2");
        self.plot("homogenized_front.dat", |w| {
            write_homogenized_front(w, &front, &h)
        })?;

        let periods = self.cfg.homogenize.periods.clone();
        if periods.is_empty() {
            return Ok(());
        }
        if periods.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(crate::config::ConfigError::new(
                "homogenize.periods",
                "must be strictly decreasing",
            )
            .into());
        }
        let cfg = self.cfg.numerics.front_config();
        let report = homogenization_sweep(
            |l| inst.with_period(l),
            &periods,
            &cfg,
            &self.cfg.budget.budget(),
            quad_n,
        )?;
        for r in &report.records {
            match (&r.error, r.c_l) {
                (Some(e), _) => self.fail(format!("homogenize L={} error={e}", r.l)),
                (None, Some(c)) => {
                    let gap = r.alignment.map_or(f64::NAN, |a| a.gap);
                    self.line(format!(
                        "homogenize L={} c_L={c:.6} c_gap_rel={:.3e} profile_gap={gap:.3e}",
                        r.l,
                        r.c_gap_rel.unwrap_or(f64::NAN)
                    ));
                }
                (None, None) => self.line(format!("homogenize L={} no speed", r.l)),
            }
        }
        self.line(format!(
            "homogenize speed_gap_decreasing={} profile_gap_decreasing={}",
            report.speed_gap_decreasing(),
            report.profile_gap_decreasing()
        ));
        self.csv("homogenize_sweep.csv", |w| write_sweep_csv(&report, w))?;
        self.json("homogenize_sweep.json", &report.records)?;
        Ok(())
    }

    fn eigen(&mut self) -> Result<()> {
        let inst = self.instance()?;
        let e = self.cfg.eigen.clone();
        let n = e.nodes_per_period.max(3);
        let ubar = vec![e.state; n];
        let q_mean = (0..n)
            .map(|j| inst.reaction.df(j as f64 / n as f64, e.state))
            .sum::<f64>()
            / n as f64;
        let label = format!("constant state {}", e.state);
        let pair = match e.boundary {
            EigenBoundary::Periodic => periodic_principal_eigen(&inst, &ubar, &label)?,
            EigenBoundary::Dirichlet => {
                dirichlet_principal_eigen(&inst, |_| e.state, e.radius, e.nodes, &label)?
            }
        };
        let bc = match e.boundary {
            EigenBoundary::Periodic => "periodic".to_string(),
            EigenBoundary::Dirichlet => format!("dirichlet R={}", e.radius),
        };
        self.line(format!(
            "eigen {bc} state={} lambda1={:.10} q_mean={:.10} residual={:.2e}",
            e.state, pair.lambda, q_mean, pair.residual
        ));
        self.json("eigen.json", &pair)?;
        let h = self.header("principal eigenfunction, max psi = 1");
        self.plot("eigenfunction.dat", |w| write_eigenfunction(w, &pair, &h))?;
        if !e.radii.is_empty() {
            let step = inst.period / n as f64;
            let trace = stability_limit(&inst, |_| e.state, &e.radii, step, Some(&ubar))?;
            for (r, l) in trace.r.iter().zip(&trace.lambda) {
                self.line(format!("eigen trace R={r} lambda1_R={l:.10}"));
            }
            self.line(format!(
                "eigen limit lambda1={:.10} unstable={}",
                trace.lambda1, trace.unstable
            ));
            self.json("eigen_trace.json", &trace)?;
            let series: Vec<(f64, f64)> = trace
                .r
                .iter()
                .copied()
                .zip(trace.lambda.iter().copied())
                .collect();
            let h = self.header("Dirichlet principal eigenvalue against half-width");
            self.plot("eigen_trace.dat", |w| {
                write_series(w, &series, [("R", "length"), ("lambda1_R", "1/time")], &h)
            })?;
        }
        Ok(())
    }

    fn steady(&mut self) -> Result<()> {
        let inst = self.instance()?;
        let homog = inst.homogenized(self.cfg.numerics.quad_n)?;
        let seeds = default_seeds(&homog);
        let search = find_periodic_steady_states(&inst, &seeds, &self.cfg.steady)?;
        for (k, s) in search.states.iter().enumerate() {
            let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
            self.line(format!(
                "steady state={k} L={} mean={mean:.8} lambda1={:.8} class={} residual={:.2e}",
                s.period,
                s.lambda1,
                s.class.label(),
                s.residual
            ));
            let h = self.header("periodic steady state over one period");
            self.plot(&format!("steady_{k}.dat"), |w| write_steady_state(w, s, &h))?;
        }
        for f in &search.failures {
            self.line(format!(
                "steady seed={} no-convergence reason={}",
                f.seed, f.reason
            ));
        }
        self.line(format!(
            "steady found={} trivial={} seed_failures={}",
            search.states.len(),
            search.trivial,
            search.failures.len()
        ));
        #[derive(Serialize)]
        struct SteadyReport<'a> {
            seeds: &'a [pulsefront::spectral::Seed],
            search: &'a pulsefront::spectral::SteadySearch,
        }
        self.json(
            "steady.json",
            &SteadyReport {
                seeds: &seeds,
                search: &search,
            },
        )
    }

    fn scan(&mut self) -> Result<()> {
        let inst = self.instance()?;
        let periods = self.cfg.scan.periods.clone();
        let cfg = self.cfg.numerics.front_config();
        let records = scan_e(
            |l| inst.with_period(l),
            &periods,
            &cfg,
            &self.cfg.budget.budget(),
            self.cfg.workers,
        )
        .map_err(|e| crate::config::ConfigError::new("scan.periods", e.to_string()))?;
        for r in &records {
            match (&r.result, &r.error) {
                (Some(q), _) => self.line(format!(
                    "scan-e L={} class={} c_level={:.6} c_period={:.6} stationary_residual={:.2e}",
                    r.l,
                    q.classification.label(),
                    q.c_level,
                    q.c_period,
                    q.stationary_residual
                )),
                (None, e) => self.fail(format!(
                    "scan-e L={} error={}",
                    r.l,
                    e.as_deref().unwrap_or("?")
                )),
            }
        }
        self.csv("scan_e.csv", |w| write_scan_csv(&records, w))?;
        self.json("scan_e.json", &records)
    }

    fn stability(&mut self) -> Result<()> {
        let inst = self.instance()?;
        let st = self.cfg.stability.clone();
        let front = self.converged_front(&inst)?;
        let cfg = st.config(self.cfg.numerics.scheme);
        let l = inst.period;
        let lattice = front.profile.clone();
        let shift = st.shift;
        let reference = move |x: f64| lattice.eval_cubic(x, x / l);
        let mut report = match st.datum {
            StabilityDatum::Shifted => {
                let g = |x: f64| reference(x - shift);
                global_stability_experiment(&inst, &front, &g, &cfg)?
            }
            StabilityDatum::Perturbed => {
                let bump = st.bump;
                let g = |x: f64| (reference(x) + bump * (-x * x).exp()).clamp(0.0, 1.0);
                global_stability_experiment(&inst, &front, &g, &cfg)?
            }
            StabilityDatum::Step => {
                let g = |x: f64| if x < 0.0 { 1.0 } else { 0.0 };
                global_stability_experiment(&inst, &front, &g, &cfg)?
            }
            StabilityDatum::Initialv2 => {
                let homog = inst.homogenized(self.cfg.numerics.quad_n)?;
                let search =
                    find_periodic_steady_states(&inst, &default_seeds(&homog), &self.cfg.steady)?;
                let mean = |s: &pulsefront::spectral::SteadyState| {
                    s.values.iter().sum::<f64>() / s.values.len() as f64
                };
                let lower = search
                    .states
                    .iter()
                    .min_by(|a, b| mean(a).total_cmp(&mean(b)))
                    .ok_or_else(|| anyhow!("no intermediate steady state found"))?;
                let upper = search
                    .states
                    .iter()
                    .max_by(|a, b| mean(a).total_cmp(&mean(b)))
                    .expect("non-empty");
                if search
                    .states
                    .iter()
                    .any(|s| s.class != StabilityClass::Unstable)
                {
                    self.line(
                        "stability initialv2 warning=not every intermediate state is unstable"
                            .into(),
                    );
                }
                let (lo_off, hi_off) = (st.left_offset, st.right_offset);
                let g = |x: f64| {
                    if x < 0.0 {
                        lower.eval(x) + lo_off
                    } else {
                        upper.eval(x) - hi_off
                    }
                };
                initialv2_experiment(&inst, &front, &search.states, lower, upper, &g, &cfg)?
            }
        };
        let datum = format!("{:?}", st.datum).to_lowercase();
        self.line(format!(
            "stability datum={datum} accepted={} c={:.6} tau_g={:.6} mu_fit={:.6} final_error={:.3e} t_offset={}{}",
            report.accepted,
            front.speed,
            report.tau_g,
            report.mu_fit,
            report.final_error,
            report.t_offset,
            if report.note.is_empty() { String::new() } else { format!(" note=\"{}\"", report.note) }
        ));

        #[derive(Serialize)]
        struct Extras {
            supersub: Vec<pulsefront::stability::SuperSubSolution>,
            spectrum: Option<pulsefront::stability::PoincareSpectrum>,
        }
        let mut extras = Extras {
            supersub: Vec::new(),
            spectrum: None,
        };
        if st.supersub {
            let k = st.supersub_k.unwrap_or(inst.reaction.lip_k);
            for kind in [SuperSubKind::Super, SuperSubKind::Sub] {
                let w = build_supersub(&inst, front.speed, kind, k);
                self.line(format!(
                    "stability supersub kind={kind:?} K={k} worst_defect={:.3e}",
                    w.worst_defect
                ));
                extras.supersub.push(w);
            }
        }
        if st.spectrum {
            let frame = ComovingFrame::new(&front, &st.frame_config(self.cfg.numerics.dt))?;
            let spec = poincare_spectrum(&frame, &inst, st.spectrum_margin, self.cfg.workers)?;
            self.line(format!(
                "stability spectrum dimension={} leading={:.6} similarity={:.6} second_modulus={:.6} essential_radius={:.6} above={}",
                spec.dimension,
                spec.leading.0,
                spec.leading_similarity,
                spec.second_modulus,
                spec.essential_radius,
                spec.above_radius.len()
            ));
            report.spectrum = spec.eigenvalues.clone();
            extras.spectrum = Some(spec);
        }
        #[derive(Serialize)]
        struct StabilityOut<'a> {
            datum: &'a str,
            speed: f64,
            report: &'a pulsefront::stability::StabilityReport,
            extras: &'a Extras,
        }
        self.json(
            "stability.json",
            &StabilityOut {
                datum: &datum,
                speed: front.speed,
                report: &report,
                extras: &extras,
            },
        )?;
        let h = self
            .header("sup-norm distance to the phase-shifted front")
            .note(format!("tau_g={} mu_fit={}", report.tau_g, report.mu_fit));
        self.plot("stability_errors.dat", |w| {
            write_error_series(w, &report.sup_errors, &h)
        })?;
        let h = self.header("best phase shift at each probe");
        self.plot("stability_tau.dat", |w| {
            write_series(w, &report.tau_trace, [("t", "time"), ("tau", "time")], &h)
        })?;
        Ok(())
    }

    fn decay(&mut self) -> Result<()> {
        let inst = self.instance()?;
        let dcfg = self.cfg.decay.root_config();
        let front = match self.cfg.decay.speed {
            Some(_) => None,
            None => Some(self.converged_front(&inst)?),
        };
        let c = self
            .cfg
            .decay
            .speed
            .or(front.as_ref().map(|f| f.speed))
            .expect("speed or front");
        let right = decay_root_mu(&inst, c, DecayBranch::Right, &dcfg)?;
        let left = decay_root_mu(&inst, c, DecayBranch::Left, &dcfg)?;
        let mut s = format!("decay c={c:.6} mu1={:.8} mu2={:.8}", right.mu, left.mu);
        let mut estimate = None;
        if let Some(f) = &front {
            if let Some(fit) = f.decay {
                s.push_str(&format!(" mu1_fit={:.6} mu2_fit={:.6}", fit.mu1, fit.mu2));
            }
            let e = decay_estimate(&inst, f, &dcfg)?;
            s.push_str(&format!(" C1={:.4e} C2={:.4e}", e.c1, e.c2));
            estimate = Some(e);
        }
        self.line(s);
        #[derive(Serialize)]
        struct DecayReport<'a> {
            speed: f64,
            right: &'a pulsefront::spectral::DecayRoot,
            left: &'a pulsefront::spectral::DecayRoot,
            fit: Option<pulsefront::fronts::DecayFit>,
            estimate: Option<pulsefront::spectral::DecayEstimate>,
        }
        self.json(
            "decay.json",
            &DecayReport {
                speed: c,
                right: &right,
                left: &left,
                fit: front.as_ref().and_then(|f| f.decay),
                estimate,
            },
        )?;
        let h = self.header("principal eigenvalue of T_mu, right branch");
        self.plot("decay_right.dat", |w| {
            write_series(
                w,
                &right.grid,
                [("mu", "1/length"), ("lambda1", "1/time")],
                &h,
            )
        })?;
        let h = self.header("principal eigenvalue of T_mu, left branch");
        self.plot("decay_left.dat", |w| {
            write_series(
                w,
                &left.grid,
                [("mu", "1/length"), ("lambda1", "1/time")],
                &h,
            )
        })?;
        Ok(())
    }

    fn quench(&mut self) -> Result<()> {
        let q = self.cfg.quench.clone();
        for &l in &q.lambdas {
            if !((q.delta * l).abs() < 1.0) {
                return Err(crate::config::ConfigError::new(
                    "quench.lambdas",
                    format!("|delta*lambda| = {} must be below 1", (q.delta * l).abs()),
                )
                .into());
            }
        }
        let cfg = self.cfg.numerics.front_config();
        let scan = quench_scan(
            q.delta,
            q.mu,
            &q.lambdas,
            &cfg,
            &self.cfg.budget.budget(),
            self.cfg.workers,
        )?;
        for r in &scan.records {
            match (&r.result, &r.error) {
                (Some(res), _) => self.line(format!(
                    "quench-scan lambda={} class={} c_level={:.6} stationary_residual={:.2e}",
                    r.lambda,
                    res.classification.label(),
                    res.c_level,
                    res.stationary_residual
                )),
                (None, e) => self.fail(format!(
                    "quench-scan lambda={} error={}",
                    r.lambda,
                    e.as_deref().unwrap_or("?")
                )),
            }
        }
        self.line(format!(
            "quench-scan delta={} mu={} non_increasing={} pinning_evidence={} stationary_consistent={}",
            q.delta, q.mu, scan.non_increasing, scan.pinning_evidence, scan.stationary_consistent
        ));
        self.csv("quench.csv", |w| write_quench_csv(&scan, w))?;
        self.json("quench.json", &scan)
    }
}
