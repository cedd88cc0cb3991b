//! Bundled element data: symbols, standard atomic masses (amu) and common
//! oxidation states.

#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub symbol: &'static str,
    pub mass: f64,
    /// `None` when no oxidation-state data is tabulated.
    pub oxidation_states: Option<&'static [i8]>,
}

pub const AMU_GRAMS: f64 = 1.66053906660e-24;

/// Looks up by atomic number (1-based).
pub fn element(z: u8) -> Option<&'static Element> {
    if z == 0 {
        return None;
    }
    ELEMENTS.get(z as usize - 1)
}

pub fn symbol(z: u8) -> Option<&'static str> {
    element(z).map(|e| e.symbol)
}

pub fn atomic_mass(z: u8) -> Option<f64> {
    element(z).map(|e| e.mass)
}

/// Case-sensitive symbol lookup; also accepts CIF-style labels with trailing
/// charges or digits such as `Na1+` or `O2-` by stripping them first.
pub fn atomic_number(symbol: &str) -> Option<u8> {
    let core: String = symbol.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    ELEMENTS.iter().position(|e| e.symbol == core).map(|i| (i + 1) as u8)
}

pub static ELEMENTS: [Element; 118] = [
    Element { symbol: "H", mass: 1.008, oxidation_states: Some(&[-1, 1]) },
    Element { symbol: "He", mass: 4.002602, oxidation_states: Some(&[]) },
    Element { symbol: "Li", mass: 6.94, oxidation_states: Some(&[1]) },
    Element { symbol: "Be", mass: 9.0121831, oxidation_states: Some(&[2]) },
    Element { symbol: "B", mass: 10.81, oxidation_states: Some(&[3]) },
    Element { symbol: "C", mass: 12.011, oxidation_states: Some(&[-4, 4]) },
    Element { symbol: "N", mass: 14.007, oxidation_states: Some(&[-3, 3, 5]) },
    Element { symbol: "O", mass: 15.999, oxidation_states: Some(&[-2]) },
    Element { symbol: "F", mass: 18.998403163, oxidation_states: Some(&[-1]) },
    Element { symbol: "Ne", mass: 20.1797, oxidation_states: Some(&[]) },
    Element { symbol: "Na", mass: 22.98976928, oxidation_states: Some(&[1]) },
    Element { symbol: "Mg", mass: 24.305, oxidation_states: Some(&[2]) },
    Element { symbol: "Al", mass: 26.9815385, oxidation_states: Some(&[3]) },
    Element { symbol: "Si", mass: 28.085, oxidation_states: Some(&[-4, 4]) },
    Element { symbol: "P", mass: 30.973761998, oxidation_states: Some(&[-3, 3, 5]) },
    Element { symbol: "S", mass: 32.06, oxidation_states: Some(&[-2, 2, 4, 6]) },
    Element { symbol: "Cl", mass: 35.45, oxidation_states: Some(&[-1, 1, 3, 5, 7]) },
    Element { symbol: "Ar", mass: 39.948, oxidation_states: Some(&[]) },
    Element { symbol: "K", mass: 39.0983, oxidation_states: Some(&[1]) },
    Element { symbol: "Ca", mass: 40.078, oxidation_states: Some(&[2]) },
    Element { symbol: "Sc", mass: 44.955908, oxidation_states: Some(&[3]) },
    Element { symbol: "Ti", mass: 47.867, oxidation_states: Some(&[4]) },
    Element { symbol: "V", mass: 50.9415, oxidation_states: Some(&[5]) },
    Element { symbol: "Cr", mass: 51.9961, oxidation_states: Some(&[3, 6]) },
    Element { symbol: "Mn", mass: 54.938044, oxidation_states: Some(&[2, 4, 7]) },
    Element { symbol: "Fe", mass: 55.845, oxidation_states: Some(&[2, 3]) },
    Element { symbol: "Co", mass: 58.933194, oxidation_states: Some(&[2, 3]) },
    Element { symbol: "Ni", mass: 58.6934, oxidation_states: Some(&[2]) },
    Element { symbol: "Cu", mass: 63.546, oxidation_states: Some(&[2]) },
    Element { symbol: "Zn", mass: 65.38, oxidation_states: Some(&[2]) },
    Element { symbol: "Ga", mass: 69.723, oxidation_states: Some(&[3]) },
    Element { symbol: "Ge", mass: 72.630, oxidation_states: Some(&[-4, 2, 4]) },
    Element { symbol: "As", mass: 74.921595, oxidation_states: Some(&[-3, 3, 5]) },
    Element { symbol: "Se", mass: 78.971, oxidation_states: Some(&[-2, 2, 4, 6]) },
    Element { symbol: "Br", mass: 79.904, oxidation_states: Some(&[-1, 1, 3, 5]) },
    Element { symbol: "Kr", mass: 83.798, oxidation_states: Some(&[2]) },
    Element { symbol: "Rb", mass: 85.4678, oxidation_states: Some(&[1]) },
    Element { symbol: "Sr", mass: 87.62, oxidation_states: Some(&[2]) },
    Element { symbol: "Y", mass: 88.90584, oxidation_states: Some(&[3]) },
    Element { symbol: "Zr", mass: 91.224, oxidation_states: Some(&[4]) },
    Element { symbol: "Nb", mass: 92.90637, oxidation_states: Some(&[5]) },
    Element { symbol: "Mo", mass: 95.95, oxidation_states: Some(&[4, 6]) },
    Element { symbol: "Tc", mass: 98.0, oxidation_states: Some(&[4, 7]) },
    Element { symbol: "Ru", mass: 101.07, oxidation_states: Some(&[3, 4]) },
    Element { symbol: "Rh", mass: 102.90550, oxidation_states: Some(&[3]) },
    Element { symbol: "Pd", mass: 106.42, oxidation_states: Some(&[2, 4]) },
    Element { symbol: "Ag", mass: 107.8682, oxidation_states: Some(&[1]) },
    Element { symbol: "Cd", mass: 112.414, oxidation_states: Some(&[2]) },
    Element { symbol: "In", mass: 114.818, oxidation_states: Some(&[3]) },
    Element { symbol: "Sn", mass: 118.710, oxidation_states: Some(&[-4, 2, 4]) },
    Element { symbol: "Sb", mass: 121.760, oxidation_states: Some(&[-3, 3, 5]) },
    Element { symbol: "Te", mass: 127.60, oxidation_states: Some(&[-2, 2, 4, 6]) },
    Element { symbol: "I", mass: 126.90447, oxidation_states: Some(&[-1, 1, 3, 5, 7]) },
    Element { symbol: "Xe", mass: 131.293, oxidation_states: Some(&[2, 4, 6]) },
    Element { symbol: "Cs", mass: 132.90545196, oxidation_states: Some(&[1]) },
    Element { symbol: "Ba", mass: 137.327, oxidation_states: Some(&[2]) },
    Element { symbol: "La", mass: 138.90547, oxidation_states: Some(&[3]) },
    Element { symbol: "Ce", mass: 140.116, oxidation_states: Some(&[3, 4]) },
    Element { symbol: "Pr", mass: 140.90766, oxidation_states: Some(&[3]) },
    Element { symbol: "Nd", mass: 144.242, oxidation_states: Some(&[3]) },
    Element { symbol: "Pm", mass: 145.0, oxidation_states: Some(&[3]) },
    Element { symbol: "Sm", mass: 150.36, oxidation_states: Some(&[3]) },
    Element { symbol: "Eu", mass: 151.964, oxidation_states: Some(&[2, 3]) },
    Element { symbol: "Gd", mass: 157.25, oxidation_states: Some(&[3]) },
    Element { symbol: "Tb", mass: 158.92535, oxidation_states: Some(&[3]) },
    Element { symbol: "Dy", mass: 162.500, oxidation_states: Some(&[3]) },
    Element { symbol: "Ho", mass: 164.93033, oxidation_states: Some(&[3]) },
    Element { symbol: "Er", mass: 167.259, oxidation_states: Some(&[3]) },
    Element { symbol: "Tm", mass: 168.93422, oxidation_states: Some(&[3]) },
    Element { symbol: "Yb", mass: 173.045, oxidation_states: Some(&[3]) },
    Element { symbol: "Lu", mass: 174.9668, oxidation_states: Some(&[3]) },
    Element { symbol: "Hf", mass: 178.49, oxidation_states: Some(&[4]) },
    Element { symbol: "Ta", mass: 180.94788, oxidation_states: Some(&[5]) },
    Element { symbol: "W", mass: 183.84, oxidation_states: Some(&[4, 6]) },
    Element { symbol: "Re", mass: 186.207, oxidation_states: Some(&[4]) },
    Element { symbol: "Os", mass: 190.23, oxidation_states: Some(&[4]) },
    Element { symbol: "Ir", mass: 192.217, oxidation_states: Some(&[3, 4]) },
    Element { symbol: "Pt", mass: 195.084, oxidation_states: Some(&[2, 4]) },
    Element { symbol: "Au", mass: 196.966569, oxidation_states: Some(&[3]) },
    Element { symbol: "Hg", mass: 200.592, oxidation_states: Some(&[1, 2]) },
    Element { symbol: "Tl", mass: 204.38, oxidation_states: Some(&[1, 3]) },
    Element { symbol: "Pb", mass: 207.2, oxidation_states: Some(&[2, 4]) },
    Element { symbol: "Bi", mass: 208.98040, oxidation_states: Some(&[3]) },
    Element { symbol: "Po", mass: 209.0, oxidation_states: Some(&[-2, 2, 4]) },
    Element { symbol: "At", mass: 210.0, oxidation_states: Some(&[-1, 1]) },
    Element { symbol: "Rn", mass: 222.0, oxidation_states: Some(&[2]) },
    Element { symbol: "Fr", mass: 223.0, oxidation_states: Some(&[1]) },
    Element { symbol: "Ra", mass: 226.0, oxidation_states: Some(&[2]) },
    Element { symbol: "Ac", mass: 227.0, oxidation_states: Some(&[3]) },
    Element { symbol: "Th", mass: 232.0377, oxidation_states: Some(&[4]) },
    Element { symbol: "Pa", mass: 231.03588, oxidation_states: Some(&[5]) },
    Element { symbol: "U", mass: 238.02891, oxidation_states: Some(&[6]) },
    Element { symbol: "Np", mass: 237.0, oxidation_states: Some(&[5]) },
    Element { symbol: "Pu", mass: 244.0, oxidation_states: Some(&[4]) },
    Element { symbol: "Am", mass: 243.0, oxidation_states: Some(&[3]) },
    Element { symbol: "Cm", mass: 247.0, oxidation_states: Some(&[3]) },
    Element { symbol: "Bk", mass: 247.0, oxidation_states: Some(&[3]) },
    Element { symbol: "Cf", mass: 251.0, oxidation_states: Some(&[3]) },
    Element { symbol: "Es", mass: 252.0, oxidation_states: Some(&[3]) },
    Element { symbol: "Fm", mass: 257.0, oxidation_states: Some(&[3]) },
    Element { symbol: "Md", mass: 258.0, oxidation_states: Some(&[3]) },
    Element { symbol: "No", mass: 259.0, oxidation_states: Some(&[2]) },
    Element { symbol: "Lr", mass: 262.0, oxidation_states: Some(&[3]) },
    Element { symbol: "Rf", mass: 267.0, oxidation_states: Some(&[4]) },
    Element { symbol: "Db", mass: 268.0, oxidation_states: Some(&[5]) },
    Element { symbol: "Sg", mass: 269.0, oxidation_states: Some(&[6]) },
    Element { symbol: "Bh", mass: 270.0, oxidation_states: Some(&[7]) },
    Element { symbol: "Hs", mass: 269.0, oxidation_states: Some(&[8]) },
    Element { symbol: "Mt", mass: 278.0, oxidation_states: None },
    Element { symbol: "Ds", mass: 281.0, oxidation_states: None },
    Element { symbol: "Rg", mass: 282.0, oxidation_states: None },
    Element { symbol: "Cn", mass: 285.0, oxidation_states: None },
    Element { symbol: "Nh", mass: 286.0, oxidation_states: None },
    Element { symbol: "Fl", mass: 289.0, oxidation_states: None },
    Element { symbol: "Mc", mass: 290.0, oxidation_states: None },
    Element { symbol: "Lv", mass: 293.0, oxidation_states: None },
    Element { symbol: "Ts", mass: 294.0, oxidation_states: None },
    Element { symbol: "Og", mass: 294.0, oxidation_states: None },
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert_eq!(atomic_number("C"), Some(6));
        assert_eq!(atomic_number("Na1+"), Some(11));
        assert_eq!(atomic_number("Xx"), None);
        assert_eq!(symbol(118), Some("Og"));
        assert_eq!(symbol(0), None);
        assert!((atomic_mass(6).unwrap() - 12.011).abs() < 1e-12);
        assert_eq!(element(17).unwrap().oxidation_states.unwrap()[0], -1);
        assert!(element(110).unwrap().oxidation_states.is_none());
    }
}
