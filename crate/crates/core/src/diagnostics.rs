use crate::scalar::Real;

/// One time sample of the monitored quantities.
///
/// Heat runs have no energy functional or GENERIC operators; their `energy`,
/// `e`, `deg_l` and `deg_m` fields are zero and `rel_ent` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord<T> {
    pub t: T,
    pub energy: T,
    pub entropy: T,
    pub mass: T,
    /// Instantaneous entropy production `⟨δS, ż⟩`.
    pub dsdt: T,
    /// `‖L δS‖`.
    pub deg_l: T,
    /// `‖M δE‖`.
    pub deg_m: T,
    /// Relative entropy against the grid Maxwellian.
    pub rel_ent: Option<T>,
    pub e: T,
}

impl<T: Real> DiagnosticsRecord<T> {
    pub fn is_finite(&self) -> bool {
        [self.t, self.energy, self.entropy, self.mass, self.dsdt, self.deg_l, self.deg_m, self.e]
            .iter()
            .all(|x| x.is_finite())
            && self.rel_ent.is_none_or(|x| x.is_finite())
    }
}
