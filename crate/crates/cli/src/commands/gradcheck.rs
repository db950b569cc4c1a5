use std::fmt::Write as _;

use rsvi::distributions::{DirichletParams, GammaMeanShapeParams};
use rsvi::engine::{softplus, softplus_jacobian};
use rsvi::mathcore::{finite_diff_grad, relative_error, RandomStream};
use rsvi::models::{gradient_self_check, LatentBlock, ModelSpec};
use rsvi::rejection::{dh_dalpha, dh_deps, grad_log_ratio_gamma, h_gam, log_ratio_q_over_r};

use crate::cli::{Command, GradcheckArgs};
use crate::failure::Failure;
use crate::output::{csv_config_line, emit};
use crate::setup::build_model;

/// Scales one gradient coordinate so the model check has something to find.
struct Corrupted<'a>(&'a dyn ModelSpec);

impl ModelSpec for Corrupted<'_> {
    fn layout(&self) -> &[LatentBlock] {
        self.0.layout()
    }
    fn log_joint(&self, z: &[f64]) -> rsvi::Result<f64> {
        self.0.log_joint(z)
    }
    fn grad_latents(&self, z: &[f64]) -> rsvi::Result<Vec<f64>> {
        let mut g = self.0.grad_latents(z)?;
        g[0] = 1.5 * g[0] + 1.0;
        Ok(g)
    }
}

struct Check {
    name: &'static str,
    max_error: f64,
}

fn max_of(errors: impl IntoIterator<Item = f64>) -> f64 {
    // NaN poisons the maximum so a broken derivative cannot pass.
    errors.into_iter().fold(0.0, |m, e| if e.is_nan() || m.is_nan() { f64::NAN } else { m.max(e) })
}

fn transform_checks(points: usize, seed: u64) -> Result<Vec<Check>, Failure> {
    let mut s = RandomStream::new(seed, 1);
    let (mut eps_err, mut alpha_err, mut glr_err) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..points {
        let a = 1.001 + 20.0 * s.draw_uniform();
        let root = (9.0 * a - 3.0f64).sqrt();
        let e = (-0.8 * root).max(-3.0) + ((0.8 * root).min(3.0) + 3.0) * s.draw_uniform();
        let fd = finite_diff_grad(|x| h_gam(x[0], x[1]).unwrap_or(f64::NAN), &[e, a], 1e-6)?;
        eps_err.push(relative_error(dh_deps(e, a)?, fd[0], 1e-8));
        alpha_err.push(relative_error(dh_dalpha(e, a)?, fd[1], 1e-8));
        let fd = finite_diff_grad(|x| log_ratio_q_over_r(e, x[0]).unwrap_or(f64::NAN), &[a], 1e-4)?[0];
        glr_err.push(relative_error(grad_log_ratio_gamma(e, a)?, fd, 1e-6));
    }
    Ok(vec![
        Check { name: "transform dh/deps", max_error: max_of(eps_err) },
        Check { name: "transform dh/dalpha", max_error: max_of(alpha_err) },
        Check { name: "log-ratio gradient", max_error: max_of(glr_err) },
    ])
}

fn entropy_checks(points: usize, seed: u64) -> Result<Vec<Check>, Failure> {
    let mut s = RandomStream::new(seed, 2);
    let (mut gamma, mut dir, mut sp) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..points {
        let a = (6.0 * s.draw_uniform() - 3.0).exp();
        let m = (4.0 * s.draw_uniform() - 2.0).exp();
        let g = GammaMeanShapeParams::new(a, m)?.entropy_grad();
        let fd = finite_diff_grad(
            |x| GammaMeanShapeParams::new(x[0], x[1]).map_or(f64::NAN, |p| p.entropy()),
            &[a, m],
            1e-6 * a.min(m),
        )?;
        gamma.push(relative_error(g.0, fd[0], 1e-6).max(relative_error(g.1, fd[1], 1e-6)));

        let c: Vec<f64> = (0..4).map(|_| (4.0 * s.draw_uniform() - 2.0).exp()).collect();
        let g = DirichletParams::new(c.clone())?.entropy_grad();
        let h = 1e-6 * c.iter().cloned().fold(f64::INFINITY, f64::min);
        let fd = finite_diff_grad(|x| DirichletParams::new(x.to_vec()).map_or(f64::NAN, |p| p.entropy()), &c, h)?;
        dir.push(max_of(g.iter().zip(&fd).map(|(a, f)| relative_error(*a, *f, 1e-6))));

        let v = 40.0 * s.draw_uniform() - 20.0;
        let fd = finite_diff_grad(|x| softplus(x[0]), &[v], 1e-5)?[0];
        sp.push(relative_error(softplus_jacobian(v), fd, 1e-12));
    }
    Ok(vec![
        Check { name: "gamma entropy gradient", max_error: max_of(gamma) },
        Check { name: "dirichlet entropy gradient", max_error: max_of(dir) },
        Check { name: "softplus jacobian", max_error: max_of(sp) },
    ])
}

pub fn run(args: &GradcheckArgs, command: &Command) -> Result<(), Failure> {
    if args.points == 0 {
        return Err(Failure::Config("points must be at least 1".into()));
    }
    if !(args.tolerance > 0.0) {
        return Err(Failure::Config("tolerance must be positive".into()));
    }
    let seed = args.seed.seed;
    let built = build_model(&args.model, seed)?;
    let corrupted = Corrupted(built.spec());
    let model: &dyn ModelSpec = if args.corrupt_gradient { &corrupted } else { built.spec() };

    let mut checks = Vec::new();
    let report = gradient_self_check(model, args.points, args.tolerance, &mut RandomStream::new(seed, 0))?;
    checks.push(Check { name: "model gradient", max_error: report.max_relative_error });
    checks.extend(transform_checks(args.points, seed)?);
    checks.extend(entropy_checks(args.points, seed)?);
    if let Some(m) = built.conjugate() {
        let mut s = RandomStream::new(seed, 3);
        let mut errs = Vec::new();
        for _ in 0..args.points {
            let t: Vec<f64> = (0..m.dim()).map(|_| (3.5 * s.draw_uniform() - 1.2).exp()).collect();
            let g = m.exact_elbo_grad(&DirichletParams::new(t.clone())?)?;
            let h = 1e-6 * t.iter().cloned().fold(f64::INFINITY, f64::min);
            let fd = finite_diff_grad(
                |x| DirichletParams::new(x.to_vec()).and_then(|q| m.exact_elbo(&q)).unwrap_or(f64::NAN),
                &t,
                h,
            )?;
            errs.push(max_of(g.iter().zip(&fd).map(|(a, f)| relative_error(*a, *f, 1e-6))));
        }
        checks.push(Check { name: "exact ELBO gradient", max_error: max_of(errs) });
    }

    let mut out = csv_config_line(command);
    out.push_str("check,points,max_relative_error,tolerance,result\n");
    let mut failed = Vec::new();
    for c in &checks {
        let ok = c.max_error <= args.tolerance;
        if !ok {
            failed.push(c.name);
        }
        writeln!(
            out,
            "{},{},{:e},{:e},{}",
            c.name,
            args.points,
            c.max_error,
            args.tolerance,
            if ok { "pass" } else { "fail" }
        )
        .unwrap();
    }
    writeln!(out, "# summary: {}/{} checks passed", checks.len() - failed.len(), checks.len()).unwrap();
    emit(args.out.as_deref(), out.as_bytes())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}
