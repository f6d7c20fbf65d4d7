//! Time-step refinement of the manufactured problem through the config front end.

use fks::cli::{parse_config, refine};

const CONFIG: &str = "
model.beta = 0.6
model.a = 1
model.b = 0.5
model.c = 1
model.d = 0.3
model.k = 0.5
model.gamma = 1
grid.L = 32
grid.N = 256
time.dt = 0.1
time.T = 1
forcing.kind = manufactured
forcing.case = nonlinear
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config(CONFIG)?;
    let rep = refine(&cfg)?;
    for r in &rep.rows {
        println!("dt = {:<8} error = {:.4e}", r.dt, r.error.unwrap_or(f64::NAN));
    }
    println!("observed orders: {:?}", rep.orders);
    Ok(())
}
