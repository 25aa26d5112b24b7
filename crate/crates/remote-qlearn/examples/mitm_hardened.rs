//! The man-in-the-middle gap and the hardened mode that closes it.
//!
//! A full impersonator who relays regular traffic is invisible to the plain
//! protocol: decoys pass, learning statistics look normal. The hardened
//! provider mounts a task gate and the learner mixes in canaries — |1⟩
//! references with the bare fiducial as payload — that an honest provider
//! returns as |1⟩ exactly. Eve must answer canaries herself against her own
//! target guess, and swap-test algebra flips each one to |0⟩ with
//! probability (1 − |⟨fiducial|guess⟩|²)/2.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use remote_qlearn::adversary::{mitm_canary_network_prob, MitmEve};
use remote_qlearn::qmath::QState;
use remote_qlearn::session::{run_session, SessionConfig};

fn main() -> remote_qlearn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let chi = QState::qubit(0);

    // Closed form vs full comparator network, for an arbitrary guess.
    let guess = QState::haar_random(2, &mut rng)?;
    let eve = MitmEve::new(chi.clone(), guess.clone())?;
    let closed = eve.canary_alarm_prob(&chi)?;
    let network = mitm_canary_network_prob(&chi, &guess)?;
    println!("per-canary alarm probability for a random guess:");
    println!("  closed form : {closed:.10}");
    println!("  full network: {network:.10}");
    assert!((closed - network).abs() < 1e-12);

    // Plain protocol: Eve forwards everything, nothing fires.
    let mut plain = SessionConfig::new(2, 30);
    plain.seed = 41;
    let mut eve = MitmEve::new(chi.clone(), QState::haar_random(2, &mut rng)?)?;
    let result = run_session(&plain, Some(&mut eve))?;
    println!();
    println!(
        "plain protocol : halted = {}, alarms = {}, canaries seen by Eve = {}",
        result.halted,
        result.alarms.total(),
        eve.canaries_answered
    );
    assert_eq!(
        result.alarms.total(),
        0,
        "no canary mechanism, no detection"
    );

    // Hardened protocol: same attacker, canaries in the trial mix.
    let mut sessions_alarmed = 0u32;
    let mut canaries = 0u64;
    let mut alarms = 0u64;
    let sessions = 200;
    for seed in 0..sessions {
        let mut hardened = SessionConfig::new_hardened(2, 30);
        hardened.seed = 60_000 + seed;
        let mut eve = MitmEve::new(chi.clone(), QState::haar_random(2, &mut rng)?)?;
        let result = run_session(&hardened, Some(&mut eve))?;
        canaries += eve.canaries_answered;
        alarms += result.alarms.canary_violations;
        if result.alarms.canary_violations > 0 {
            sessions_alarmed += 1;
        }
    }
    println!(
        "hardened mode  : {sessions_alarmed}/{sessions} sessions alarmed, {:.3} alarms per canary",
        alarms as f64 / canaries as f64
    );
    // Haar-averaged guess quality gives E[(1 − F)/2] = 1/4 per canary; the
    // rare silent sessions are lucky guesses with F near 1.
    assert!(sessions_alarmed as f64 / sessions as f64 > 0.9);
    assert!((alarms as f64 / canaries as f64 - 0.25).abs() < 0.05);

    // Worst case for Eve: a guess orthogonal to the canary payload flips a
    // fair coin per canary, so ten canaries already detect at the 99.9% level.
    let mut all_alarmed = true;
    for seed in 0..sessions {
        let mut hardened = SessionConfig::new_hardened(2, 30);
        hardened.seed = 90_000 + seed;
        let mut eve = MitmEve::new(chi.clone(), QState::qubit(1))?;
        let result = run_session(&hardened, Some(&mut eve))?;
        all_alarmed &= result.alarms.canary_violations > 0;
    }
    println!("orthogonal guess: every one of {sessions} sessions alarmed = {all_alarmed}");
    assert!(all_alarmed);
    Ok(())
}
