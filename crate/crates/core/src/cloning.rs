//! Closed-form reduced states of the Buzek-Hillery cloner acting on a
//! two-qubit input, for local (one M=2 cloner per qubit) and non-local
//! (one M=4 cloner on the pair) cloning.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coherence::coherence_of;
use crate::error::{Error, Result};
use crate::states::BlochTwoQubit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Local,
    Nonlocal,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Local, Mode::Nonlocal];

    /// Upper end of the machine-parameter range for the closed-form maps.
    pub fn max_lambda(self) -> f64 {
        match self {
            Mode::Local => 0.5,
            Mode::Nonlocal => 0.25,
        }
    }

    /// Machine parameter of the state-independent (optimal) cloner.
    pub fn si_lambda(self) -> f64 {
        match self {
            Mode::Local => 1.0 / 6.0,
            Mode::Nonlocal => 1.0 / 10.0,
        }
    }

    /// Hilbert-space dimension the cloner copies.
    pub fn cloner_dim(self) -> usize {
        match self {
            Mode::Local => 2,
            Mode::Nonlocal => 4,
        }
    }

    fn shrinking(self, lambda: f64) -> f64 {
        match self {
            Mode::Local => 1.0 - 2.0 * lambda,
            Mode::Nonlocal => 1.0 - 4.0 * lambda,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Local => "local",
            Mode::Nonlocal => "nonlocal",
        })
    }
}

/// Cloning regime and machine parameter lambda = d^2, with the derived
/// shrinking factor mu.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MachineParam {
    mode: Mode,
    lambda: f64,
    mu: f64,
}

impl MachineParam {
    pub fn new(mode: Mode, lambda: f64) -> Result<Self> {
        let max = mode.max_lambda();
        if !(0.0..=max).contains(&lambda) {
            return Err(Error::LambdaOutOfRange { mode, lambda, max });
        }
        Ok(Self {
            mode,
            lambda,
            mu: mode.shrinking(lambda),
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Correlation matrix diagonal of the same-side output pairs (1,3) and (2,4).
    pub fn local_pair_correlations(&self) -> [f64; 3] {
        let l = self.lambda;
        match self.mode {
            Mode::Local => [2.0 * l, 2.0 * l, 1.0 - 4.0 * l],
            Mode::Nonlocal => [2.0 * l, 2.0 * l, 1.0 - 8.0 * l],
        }
    }
}

/// State-independent machine: lambda = 1/6 (local), 1/10 (non-local).
pub fn si_machine(mode: Mode) -> MachineParam {
    MachineParam::new(mode, mode.si_lambda()).expect("state-independent lambda is in range")
}

/// The four reduced output states in Bloch form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CloneOutputs {
    pub rho12: BlochTwoQubit,
    pub rho34: BlochTwoQubit,
    pub rho13: BlochTwoQubit,
    pub rho24: BlochTwoQubit,
    pub machine: MachineParam,
}

/// Computational-basis l1 coherences of the four outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputCoherences {
    pub coh_12: f64,
    pub coh_34: f64,
    pub coh_13: f64,
    pub coh_24: f64,
}

impl CloneOutputs {
    pub fn coherences(&self) -> OutputCoherences {
        OutputCoherences {
            coh_12: coherence_of(&self.rho12),
            coh_34: coherence_of(&self.rho34),
            coh_13: coherence_of(&self.rho13),
            coh_24: coherence_of(&self.rho24),
        }
    }

    /// Pairs in the order (12, 34, 13, 24).
    pub fn pairs(&self) -> [(&'static str, &BlochTwoQubit); 4] {
        [
            ("rho12", &self.rho12),
            ("rho34", &self.rho34),
            ("rho13", &self.rho13),
            ("rho24", &self.rho24),
        ]
    }
}

fn same_side_pairs(s: &BlochTwoQubit, m: &MachineParam) -> (BlochTwoQubit, BlochTwoQubit) {
    let mu = m.mu;
    let diag = m.local_pair_correlations();
    let mx = s.x.map(|v| mu * v);
    let my = s.y.map(|v| mu * v);
    (
        BlochTwoQubit::diagonal(mx, mx, diag),
        BlochTwoQubit::diagonal(my, my, diag),
    )
}

fn expect_mode(m: &MachineParam, expected: Mode) -> Result<()> {
    if m.mode != expected {
        return Err(Error::ModeMismatch {
            expected,
            actual: m.mode,
        });
    }
    Ok(())
}

/// rho12 = rho34 = {mu x, mu y, mu^2 T}, rho13 = {mu x, mu x, T_l}, rho24 = {mu y, mu y, T_l}.
pub fn clone_local(s: &BlochTwoQubit, m: &MachineParam) -> Result<CloneOutputs> {
    expect_mode(m, Mode::Local)?;
    let mu = m.mu;
    let pair = s.scaled(mu, mu, mu * mu);
    let (rho13, rho24) = same_side_pairs(s, m);
    Ok(CloneOutputs {
        rho12: pair,
        rho34: pair,
        rho13,
        rho24,
        machine: *m,
    })
}

/// rho12 = rho34 = {mu x, mu y, mu T}, rho13 = {mu x, mu x, T_nl}, rho24 = {mu y, mu y, T_nl}.
pub fn clone_nonlocal(s: &BlochTwoQubit, m: &MachineParam) -> Result<CloneOutputs> {
    expect_mode(m, Mode::Nonlocal)?;
    let mu = m.mu;
    let pair = s.scaled(mu, mu, mu);
    let (rho13, rho24) = same_side_pairs(s, m);
    Ok(CloneOutputs {
        rho12: pair,
        rho34: pair,
        rho13,
        rho24,
        machine: *m,
    })
}

pub fn clone(s: &BlochTwoQubit, m: &MachineParam) -> CloneOutputs {
    match m.mode {
        Mode::Local => clone_local(s, m),
        Mode::Nonlocal => clone_nonlocal(s, m),
    }
    .expect("mode dispatch matches")
}

/// Printed coherence of the same-side pair (1,3) as a function of the
/// in-plane Bloch length |x_perp| = sqrt(x1^2 + x2^2).
pub fn local_pair_coherence(mode: Mode, lambda: f64, in_plane: f64) -> f64 {
    match mode {
        Mode::Local => 2.0 * in_plane + 2.0 * lambda * (1.0 - 2.0 * in_plane),
        Mode::Nonlocal => 2.0 * in_plane + 2.0 * lambda * (1.0 - 4.0 * in_plane),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{mcs_mis_mixture, MixParam};

    #[test]
    fn machine_ranges() {
        assert!(MachineParam::new(Mode::Local, 0.5).is_ok());
        assert!(MachineParam::new(Mode::Local, 0.0).is_ok());
        assert!(MachineParam::new(Mode::Local, 0.51).is_err());
        assert!(MachineParam::new(Mode::Nonlocal, 0.25).is_ok());
        assert!(matches!(
            MachineParam::new(Mode::Nonlocal, 0.3),
            Err(Error::LambdaOutOfRange { .. })
        ));
        assert!(MachineParam::new(Mode::Local, -1e-9).is_err());
        assert!(MachineParam::new(Mode::Local, f64::NAN).is_err());
    }

    #[test]
    fn si_values() {
        let l = si_machine(Mode::Local);
        assert_eq!(l.lambda(), 1.0 / 6.0);
        assert!((l.mu() - 2.0 / 3.0).abs() < 1e-15);
        let n = si_machine(Mode::Nonlocal);
        assert_eq!(n.lambda(), 0.1);
        assert!((n.mu() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn mode_mismatch() {
        let s = BlochTwoQubit::maximally_mixed();
        assert!(matches!(
            clone_local(&s, &si_machine(Mode::Nonlocal)),
            Err(Error::ModeMismatch { .. })
        ));
        assert!(clone_nonlocal(&s, &si_machine(Mode::Local)).is_err());
    }

    #[test]
    fn local_si_on_mixture() {
        for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let s = mcs_mis_mixture(MixParam::new(p).unwrap());
            let c = clone_local(&s, &si_machine(Mode::Local)).unwrap().coherences();
            assert!((c.coh_12 - 16.0 * p / 9.0).abs() < 1e-14);
            assert!((c.coh_34 - 16.0 * p / 9.0).abs() < 1e-14);
            assert!((c.coh_13 - (1.0 + 4.0 * p) / 3.0).abs() < 1e-14);
            assert!((c.coh_24 - (1.0 + 4.0 * p) / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn nonlocal_si_on_mixture() {
        for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let s = mcs_mis_mixture(MixParam::new(p).unwrap());
            let c = clone_nonlocal(&s, &si_machine(Mode::Nonlocal)).unwrap().coherences();
            assert!((c.coh_12 - 9.0 * p / 5.0).abs() < 1e-14);
            assert!((c.coh_13 - (1.0 + 6.0 * p) / 5.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_at_zero_lambda() {
        let s = mcs_mis_mixture(MixParam::new(0.4).unwrap());
        let out = clone_local(&s, &MachineParam::new(Mode::Local, 0.0).unwrap()).unwrap();
        assert_eq!(out.rho12, s);
        assert_eq!(out.rho34, s);
    }

    #[test]
    fn incoherent_input_gains_same_side_coherence() {
        let s = BlochTwoQubit::maximally_mixed();
        for lambda in [0.05, 1.0 / 6.0, 0.3, 0.5] {
            let out = clone_local(&s, &MachineParam::new(Mode::Local, lambda).unwrap()).unwrap();
            assert_eq!(out.rho12, s);
            let c = out.coherences();
            assert!(c.coh_12 == 0.0);
            assert!((c.coh_13 - 2.0 * lambda).abs() < 1e-15);
            assert!((c.coh_24 - 2.0 * lambda).abs() < 1e-15);
        }
    }

    #[test]
    fn nonlocal_endpoint_fully_depolarizes() {
        let s = mcs_mis_mixture(MixParam::new(1.0).unwrap());
        let out = clone_nonlocal(&s, &MachineParam::new(Mode::Nonlocal, 0.25).unwrap()).unwrap();
        assert_eq!(out.rho12, BlochTwoQubit::maximally_mixed());
    }

    #[test]
    fn printed_same_side_formula() {
        let s = BlochTwoQubit::diagonal([0.3, -0.4, 0.2], [0.1, 0.0, 0.0], [0.1, 0.0, 0.0]);
        for mode in Mode::BOTH {
            let m = MachineParam::new(mode, 0.07).unwrap();
            let c = clone(&s, &m).coherences();
            let want = local_pair_coherence(mode, 0.07, 0.5);
            assert!((c.coh_13 - want).abs() < 1e-14, "{mode}");
        }
    }

    /// Counts same-side outputs that fail to be density matrices. The
    /// closed forms are only guaranteed physical at the state-independent
    /// points; elsewhere the count is recorded, not required to vanish.
    fn non_psd_same_side(mode: Mode, lambda: f64, n: usize) -> usize {
        let mut rng = crate::sampling::rng_from_seed(41);
        let m = MachineParam::new(mode, lambda).unwrap();
        (0..n)
            .filter(|_| {
                let out = clone(&crate::sampling::random_bloch(&mut rng), &m);
                [&out.rho13, &out.rho24]
                    .iter()
                    .any(|p| !crate::states::validate_state(&crate::states::bloch_to_density(p)).valid)
            })
            .count()
    }

    #[test]
    fn same_side_positivity_measured() {
        for mode in Mode::BOTH {
            assert_eq!(non_psd_same_side(mode, mode.si_lambda(), 300), 0, "{mode}");
        }
        let local = non_psd_same_side(Mode::Local, 0.02, 300);
        let nonlocal = non_psd_same_side(Mode::Nonlocal, 0.2, 300);
        println!("non-PSD same-side outputs: local lambda=0.02 {local}/300, nonlocal lambda=0.2 {nonlocal}/300");
        assert!(local + nonlocal > 0);
    }
}
