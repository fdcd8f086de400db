// Solve a small transportation problem exactly and read off the Earth
// Mover's Distance.
//
// ```bash
// cargo run -p domsim --example transport_solver
// ```

use std::error::Error;

use domsim::{emd_value, solve_transport, validate_plan, TransportProblem};
use ndarray::array;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // Two sources holding 0.7 and 0.3 of the mass, two sinks needing 0.4
    // and 0.6.
    let problem = TransportProblem::new(
        vec![0.7, 0.3],
        vec![0.4, 0.6],
        array![[1.0, 2.0], [3.0, 1.0]],
    )?;
    let plan = solve_transport(&problem)?;
    let check = validate_plan(&plan.flow, &problem)?;

    println!("optimal flow:\n{:.3}", plan.flow);
    println!("total work      {:.6}", plan.objective);
    println!("EMD             {:.6}", emd_value(&plan)?);
    println!(
        "feasible        {} (row residual {:.1e}, column residual {:.1e})",
        check.feasible, check.max_row_residual, check.max_col_residual
    );
    assert!((plan.objective - 1.3).abs() < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
