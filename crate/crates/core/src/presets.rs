//! Group specs shipped with the crate.

pub const U_S3: &str = include_str!("../specs/u_s3.tdlc");
pub const TWO_COPY: &str = include_str!("../specs/two_copy.tdlc");
pub const ROTATIONS: &str = include_str!("../specs/rotations.tdlc");
pub const HALF_TREE: &str = include_str!("../specs/half_tree.tdlc");
pub const ROOTED_C2: &str = include_str!("../specs/rooted_c2.tdlc");
pub const ROOTED_S3: &str = include_str!("../specs/rooted_s3.tdlc");
pub const S4_LOCAL: &str = include_str!("../specs/s4_local.tdlc");
pub const CONTRACTION: &str = include_str!("../specs/contraction.tdlc");

/// `(name, text)` for every shipped spec.
pub const ALL: [(&str, &str); 8] = [
    ("u_s3", U_S3),
    ("two_copy", TWO_COPY),
    ("rotations", ROTATIONS),
    ("half_tree", HALF_TREE),
    ("rooted_c2", ROOTED_C2),
    ("rooted_s3", ROOTED_S3),
    ("s4_local", S4_LOCAL),
    ("contraction", CONTRACTION),
];

pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfile::GroupSpec;

    #[test]
    fn every_preset_parses_into_its_universal_group() {
        for (name, text) in ALL {
            let spec = GroupSpec::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let u = spec.universal().unwrap();
            for (el, g) in &spec.elements {
                assert!(u.contains(g), "{name}: {el} leaves U(F)");
            }
        }
        assert_eq!(GroupSpec::parse(HALF_TREE).unwrap().elements.len(), 22);
        assert!(get("u_s3").is_some() && get("nope").is_none());
    }
}
