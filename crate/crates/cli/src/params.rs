use std::io::Write;

use ris_perf::channel::{laguerre_params, mean_cascaded_element, var_cascaded_element};

use crate::args::ParamsArgs;
use crate::eval::num;
use crate::CliError;

pub fn run(args: &ParamsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let link = args.link.link()?;
    let numerical = |e: ris_perf::Error| CliError::Numerical(e.to_string());
    let e = mean_cascaded_element(&link.hop1, &link.hop2);
    let v = var_cascaded_element(&link.hop1, &link.hop2).map_err(numerical)?;
    let g = laguerre_params(&link).map_err(numerical)?;
    let n = link.n_elements() as f64;
    let mut text = String::new();
    for (name, h) in [("hop1", link.hop1), ("hop2", link.hop2)] {
        text += &format!("{name}_k: {}\n{name}_omega: {}\n", num(h.k()), num(h.omega()));
    }
    text += &format!("elements: {}\n", link.n_elements());
    for (key, value) in [
        ("element_mean", e),
        ("element_var", v),
        ("sum_mean", n * e),
        ("sum_var", n * v),
        ("a", g.a()),
        ("b", g.b()),
        ("shape", g.shape()),
    ] {
        text += &format!("{key}: {}\n", num(value));
    }
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io("standard output", e))
}
