//! `cargo run -p gptw-core --example quickstart`

use gptw_core::correlations::{check_no_signalling, library::pr_box, max_chsh};
use gptw_core::ontic::find_local_model;
use gptw_core::quantum::{bipartite_box, DensityMatrix, Povm};
use gptw_core::{Box64, Exact, ExactBox};

fn main() -> gptw_core::Result<()> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let alice = vec![Povm::pauli_z(), Povm::pauli_x()];
    let bob = vec![Povm::qubit_axis([-s, 0.0, -s])?, Povm::qubit_axis([s, 0.0, -s])?];
    let bx: Box64 = bipartite_box(&DensityMatrix::singlet(), &alice, &bob)?;

    println!("singlet CHSH: {}", max_chsh(&bx, 0, 1)?.value);
    assert!(check_no_signalling(&bx, &1e-9)?.no_signalling);
    assert!(find_local_model(&bx, 1e-7)?.is_none());

    let pr: ExactBox = pr_box();
    let value = max_chsh(&pr, 0, 1)?.value;
    assert_eq!(value, Exact::from_integer(4.into()));
    println!("PR box CHSH: {value}");
    Ok(())
}
