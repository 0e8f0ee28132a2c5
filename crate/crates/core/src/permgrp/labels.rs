use std::fmt;

use serde::{Serialize, Serializer};

/// Isomorphism label of a finite simple group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleLabel {
    Cyclic(u64),
    Alternating(usize),
    /// A nonabelian simple group identified by its order alone.
    Named {
        order: usize,
        name: &'static str,
    },
    /// Order not in the table (or shared by two simple groups).
    Order(usize),
}

impl SimpleLabel {
    pub fn order(&self) -> usize {
        match *self {
            SimpleLabel::Cyclic(p) => p as usize,
            SimpleLabel::Alternating(n) => (3..=n).product::<usize>(),
            SimpleLabel::Named { order, .. } | SimpleLabel::Order(order) => order,
        }
    }
}

impl fmt::Display for SimpleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleLabel::Cyclic(p) => write!(f, "C{p}"),
            SimpleLabel::Alternating(n) => write!(f, "A{n}"),
            SimpleLabel::Named { name, .. } => f.write_str(name),
            SimpleLabel::Order(o) => write!(f, "simple[{o}]"),
        }
    }
}

impl Serialize for SimpleLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Nonabelian simple groups of order below 20160, where the order alone
/// determines the group.
const TABLE: &[(usize, &str)] = &[
    (60, "A5"),
    (168, "L2(7)"),
    (360, "A6"),
    (504, "L2(8)"),
    (660, "L2(11)"),
    (1092, "L2(13)"),
    (2448, "L2(17)"),
    (2520, "A7"),
    (3420, "L2(19)"),
    (4080, "L2(16)"),
    (5616, "L3(3)"),
    (6048, "U3(3)"),
    (6072, "L2(23)"),
    (7800, "L2(25)"),
    (7920, "M11"),
    (9828, "L2(27)"),
    (12180, "L2(29)"),
    (14880, "L2(31)"),
];

/// Labels a simple group of the given order.
pub fn label_simple(order: usize) -> SimpleLabel {
    let pf = super::normal::prime_factors(order as u64);
    if pf.len() == 1 {
        return SimpleLabel::Cyclic(pf[0]);
    }
    match TABLE.iter().find(|(o, _)| *o == order) {
        Some((60, _)) => SimpleLabel::Alternating(5),
        Some((360, _)) => SimpleLabel::Alternating(6),
        Some((2520, _)) => SimpleLabel::Alternating(7),
        Some(&(order, name)) => SimpleLabel::Named { order, name },
        None => SimpleLabel::Order(order),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_by_order() {
        assert_eq!(label_simple(2), SimpleLabel::Cyclic(2));
        assert_eq!(label_simple(60).to_string(), "A5");
        assert_eq!(label_simple(168).to_string(), "L2(7)");
        assert_eq!(label_simple(20160), SimpleLabel::Order(20160));
        assert_eq!(SimpleLabel::Alternating(5).order(), 60);
    }
}
