//! The comparator network in isolation: swap-test statistics against the
//! closed-form outcome law.
//!
//! The provider's device sandwiches a controlled-swap between Hadamards on
//! the reference qubit. For a |0⟩ reference the returned qubit reads 0 with
//! probability (1 + f)/2, where f is the fidelity between the incoming
//! output state and the hidden target — that single interference term is
//! everything the learner ever sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use remote_qlearn::gate::BobModule;
use remote_qlearn::qmath::QState;

fn main() -> remote_qlearn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let shots = 20_000;

    println!("swap-test sampling vs closed form, {shots} shots per row");
    println!();
    println!(
        "{:>4}  {:>10}  {:>10}  {:>10}",
        "d", "fidelity", "empirical", "|diff|"
    );
    for d in [2usize, 3, 5] {
        let target = QState::haar_random(d, &mut rng)?;
        let output = QState::haar_random(d, &mut rng)?;
        let f = target.fidelity(&output)?;
        let module = BobModule::new(d, target, false, None)?;

        let composite = module.apply(&QState::qubit(0), &output)?;
        let mut zeros = 0u32;
        for _ in 0..shots {
            let (bit, _) = composite.measure_first_qubit(&mut rng)?;
            if bit == 0 {
                zeros += 1;
            }
        }
        let empirical = zeros as f64 / shots as f64;
        let expected = (1.0 + f) / 2.0;
        println!(
            "{:>4}  {:>10.5}  {:>10.5}  {:>10.5}",
            d,
            f,
            empirical,
            (empirical - expected).abs()
        );
        assert!((empirical - expected).abs() < 0.02);
    }

    // Decoy transparency: ± references pass through a plain comparator with
    // their sign intact, whatever state rides the output channel.
    println!();
    let d = 3;
    let target = QState::haar_random(d, &mut rng)?;
    let blinded = QState::haar_random(d, &mut rng)?;
    let module = BobModule::new(d, target, false, None)?;
    for (name, reference) in [
        ("|+>", QState::qubit_plus()),
        ("|->", QState::qubit_minus()),
    ] {
        let composite = module.apply(&reference, &blinded)?;
        let reduced = composite.reduced_first_qubit()?;
        let expect = reference.amplitudes() * reference.amplitudes().adjoint();
        let deviation: f64 = (&reduced - &expect)
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        println!("decoy {name}: returned reference deviation from sent state = {deviation:.2e}");
        assert!(deviation < 1e-12);
    }
    Ok(())
}
