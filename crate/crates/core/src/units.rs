//! Physical constants and atomic masses (SI).

/// Boltzmann constant, J/K (exact in SI 2019).
pub const K_B: f64 = 1.380649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Bohr magneton, J/T.
pub const MU_B: f64 = 9.2740100783e-24;

/// Atomic masses in kg, keyed by the names accepted in parameter files.
pub const SPECIES: &[(&str, f64)] = &[
    ("K-39", 6.4923e-26),
    ("Na-23", 3.8175e-26),
    ("Rb-87", 1.4432e-25),
    ("Cs-133", 2.2069e-25),
];

/// Case-insensitive species lookup; "K39" and "k-39" both work.
pub fn species_mass(name: &str) -> Option<f64> {
    let norm = |s: &str| {
        s.chars()
            .filter(|c| *c != '-')
            .collect::<String>()
            .to_ascii_lowercase()
    };
    let wanted = norm(name);
    SPECIES
        .iter()
        .find(|(n, _)| norm(n) == wanted)
        .map(|&(_, m)| m)
}
