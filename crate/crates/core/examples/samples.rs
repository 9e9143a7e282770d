//! Writes the sample input files used in the README into a directory.
//!
//! `cargo run -p gptw-core --example samples -- data`

use std::fs;
use std::path::PathBuf;

use gptw_core::correlations::library::{isotropic, pr_box, shared_bit, signalling_box};
use gptw_core::quantum::file::{PovmFile, PovmSetFile};
use gptw_core::quantum::{bipartite_box, born_table, Channel, DensityMatrix, Povm};
use gptw_core::theory::{MeasId, PrepId};

fn povm_set(parties: &[Vec<Povm>]) -> String {
    let file =
        PovmSetFile::Parties { parties: parties.iter().map(|p| p.iter().map(PovmFile::from_povm).collect()).collect() };
    serde_json::to_string_pretty(&file).expect("povms serialize")
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    fs::create_dir_all(&dir)?;
    let write = |name: &str, text: String| fs::write(dir.join(name), text + "\n");

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let alice = vec![Povm::pauli_z(), Povm::pauli_x()];
    let bob = vec![Povm::qubit_axis([-s, 0.0, -s]).unwrap(), Povm::qubit_axis([s, 0.0, -s]).unwrap()];
    let singlet_opt = bipartite_box(&DensityMatrix::singlet(), &alice, &bob).unwrap();

    write("pr.json", pr_box::<f64>().to_json())?;
    write("isotropic_half.json", isotropic(0.5).to_json())?;
    write("singlet_opt.json", singlet_opt.to_json())?;
    write("shared_bit3.json", shared_bit::<f64>(3).to_json())?;
    write("signalling.json", signalling_box::<f64>().to_json())?;

    write("singlet.json", DensityMatrix::singlet().to_json())?;
    write("phi_plus.json", DensityMatrix::phi_plus().to_json())?;
    write("ghz.json", DensityMatrix::ghz().to_json())?;
    write("optimal_settings.json", povm_set(&[alice, bob]))?;
    write("zz.json", povm_set(&[vec![Povm::pauli_z()], vec![Povm::pauli_z()]]))?;
    write("ghz_settings.json", povm_set(&vec![vec![Povm::pauli_x(), Povm::pauli_y()]; 3]))?;

    write("zero.json", DensityMatrix::basis(2, 0).to_json())?;
    write("plus.json", DensityMatrix::pure_real(&[1.0, 1.0]).unwrap().to_json())?;
    write("mixed_diag.json", DensityMatrix::diagonal(&[0.3, 0.7]).unwrap().to_json())?;
    write("identity.json", Channel::identity(2).to_json())?;

    let states: Vec<(PrepId, DensityMatrix)> = [
        ("x+", [1.0, 0.0, 0.0]),
        ("x-", [-1.0, 0.0, 0.0]),
        ("y+", [0.0, 1.0, 0.0]),
        ("y-", [0.0, -1.0, 0.0]),
        ("z+", [0.0, 0.0, 1.0]),
        ("z-", [0.0, 0.0, -1.0]),
        ("xz", [s, 0.0, s]),
        ("mixed", [0.0, 0.0, 0.0]),
    ]
    .into_iter()
    .map(|(n, r)| (PrepId::from(n), DensityMatrix::bloch(r).unwrap()))
    .collect();
    let meas =
        [("X", Povm::pauli_x()), ("Y", Povm::pauli_y()), ("Z", Povm::pauli_z())].map(|(n, p)| (MeasId::from(n), p));
    write("qubit.json", born_table(&states, &meas, &[]).unwrap().to_json())?;

    write(
        "model.json",
        r#"{"n_ontic": 2, "mu": {"P": [0.5, 0.5]}, "xi": {"M": [[1.0, 0.0], [0.0, 1.0]]}, "trans": {"flip": [[0.0, 1.0], [1.0, 0.0]]}}"#
            .into(),
    )?;
    write(
        "bad_model.json",
        r#"{"n_ontic": 2, "mu": {"P": [0.5, 0.25]}, "xi": {"M": [[1.0, 0.0], [0.0, 1.0]]}}"#.into(),
    )?;
    Ok(())
}
