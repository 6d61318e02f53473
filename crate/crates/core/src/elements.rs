//! Periodic-table lookup and the valence tables used by hydrogen expansion
//! and valence checking.

const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

pub const HYDROGEN: u8 = 1;
pub const BORON: u8 = 5;
pub const CARBON: u8 = 6;
pub const NITROGEN: u8 = 7;
pub const OXYGEN: u8 = 8;
pub const FLUORINE: u8 = 9;
pub const PHOSPHORUS: u8 = 15;
pub const SULFUR: u8 = 16;
pub const CHLORINE: u8 = 17;
pub const BROMINE: u8 = 35;
pub const IODINE: u8 = 53;

/// Atomic number for a case-sensitive element symbol.
pub fn atomic_number(symbol: &str) -> Option<u8> {
    SYMBOLS
        .iter()
        .position(|s| *s == symbol)
        .map(|i| (i + 1) as u8)
}

pub fn symbol(atomic_number: u8) -> &'static str {
    SYMBOLS
        .get(usize::from(atomic_number).wrapping_sub(1))
        .copied()
        .unwrap_or("?")
}

/// Valence used to fill implicit hydrogens. `None` for elements outside the
/// organic subset.
pub fn default_valence(atomic_number: u8) -> Option<u32> {
    match atomic_number {
        BORON => Some(3),
        CARBON => Some(4),
        NITROGEN => Some(3),
        OXYGEN => Some(2),
        PHOSPHORUS => Some(3),
        SULFUR => Some(2),
        FLUORINE | CHLORINE | BROMINE | IODINE => Some(1),
        _ => None,
    }
}

/// Largest neutral valence accepted by the parser before raising
/// `ValenceExceeded`. Charged atoms get `|charge|` extra.
pub fn max_valence(atomic_number: u8) -> Option<u32> {
    match atomic_number {
        HYDROGEN => Some(1),
        BORON => Some(3),
        CARBON => Some(4),
        NITROGEN => Some(5),
        OXYGEN => Some(2),
        FLUORINE => Some(1),
        PHOSPHORUS => Some(5),
        SULFUR => Some(6),
        CHLORINE | BROMINE | IODINE => Some(7),
        _ => None,
    }
}

/// Elements that hybridization codes are assigned to.
pub fn has_hybridization_code(atomic_number: u8) -> bool {
    matches!(
        atomic_number,
        CARBON | NITROGEN | OXYGEN | PHOSPHORUS | SULFUR
    )
}
