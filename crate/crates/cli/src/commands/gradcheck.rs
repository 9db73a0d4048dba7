use anyhow::{bail, Result};
use clap::Args;
use irisparse::losses::{run_gradcheck, GradcheckOptions, LossKind};

use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    /// Random instances per loss.
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    /// Deliberately perturb one loss's analytic gradient (negative control).
    #[arg(long, hide = true)]
    pub corrupt: Option<String>,
}

pub fn run(ctx: &Context, a: &GradcheckArgs) -> Result<i32> {
    let corrupt = match a.corrupt.as_deref() {
        None => None,
        Some(name) => match LossKind::ALL.into_iter().find(|k| k.name() == name) {
            Some(k) => Some(k),
            None => bail!("unknown loss {name:?}"),
        },
    };
    let opts = GradcheckOptions { seed: ctx.seed, instances: a.instances, corrupt, ..Default::default() };
    let report = run_gradcheck(&opts)?;
    for e in &report.entries {
        let verdict = if e.max_rel_error < report.tolerance { "ok" } else { "FAIL" };
        println!("{:<14} max_rel_error {:.3e}  {verdict}", e.loss.name(), e.max_rel_error);
    }
    Ok(if report.passed() { 0 } else { 1 })
}
