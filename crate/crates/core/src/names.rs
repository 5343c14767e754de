//! Naming scheme for predicates introduced by the transformations.
//!
//! Rendering is injective so the engine and the reports can recover what a
//! generated predicate stands for from its name alone:
//!
//! - demand on `p` with pattern `s`: `d_p_s` (for a complement, `d_n.p_s`)
//! - complement of `p`: `n.p`
//! - decomposition intermediate `k` of rule `r`: `r<r>_i<k>`
//! - projection / equality filter `j` of `q`: `q_proj<j>` / `q_eq<j>`
//!
//! The `.` in complement names is illegal in user identifiers; the other
//! shapes are legal, so the transformations reject user programs whose
//! predicates collide with a name they are about to generate.

use crate::ast::BindingPattern;

/// What a generated predicate stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratedName {
    /// Demand on `base` restricted to the bound positions of `pattern`.
    Demand {
        base: String,
        pattern: BindingPattern,
    },
    /// Complement of `base`: the demanded tuples on which `base` is false.
    Complement { base: String },
    /// Intermediate predicate `index` produced while decomposing rule `rule`.
    Intermediate { rule: usize, index: usize },
    /// Projection of `base` dropping singleton-variable positions.
    Projection { base: String, index: usize },
    /// Filter of `base` for repeated variables within one hypothesis.
    EqualityFilter { base: String, index: usize },
}

/// Role labels, with demand-of-complement split out from plain demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Demand,
    Complement,
    DemandOfComplement,
    Intermediate,
    Projection,
    EqualityFilter,
}

pub const COMPLEMENT_PREFIX: &str = "n.";
const DEMAND_PREFIX: &str = "d_";

impl GeneratedName {
    pub fn role(&self) -> Role {
        match self {
            GeneratedName::Demand { base, .. } => {
                if base.starts_with(COMPLEMENT_PREFIX) {
                    Role::DemandOfComplement
                } else {
                    Role::Demand
                }
            }
            GeneratedName::Complement { .. } => Role::Complement,
            GeneratedName::Intermediate { .. } => Role::Intermediate,
            GeneratedName::Projection { .. } => Role::Projection,
            GeneratedName::EqualityFilter { .. } => Role::EqualityFilter,
        }
    }

    pub fn render(&self) -> String {
        match self {
            GeneratedName::Demand { base, pattern } => format!("d_{base}_{pattern}"),
            GeneratedName::Complement { base } => format!("n.{base}"),
            GeneratedName::Intermediate { rule, index } => format!("r{rule}_i{index}"),
            GeneratedName::Projection { base, index } => format!("{base}_proj{index}"),
            GeneratedName::EqualityFilter { base, index } => format!("{base}_eq{index}"),
        }
    }

    /// Inverse of [`render`](Self::render). Returns `None` for names that do
    /// not match any generated shape, i.e. ordinary user predicates.
    ///
    /// The demand shape takes precedence, with its pattern read from the
    /// final underscore segment; the remaining shapes cannot overlap with it.
    pub fn parse(name: &str) -> Option<GeneratedName> {
        if let Some(rest) = name.strip_prefix(DEMAND_PREFIX) {
            if let Some((base, pat)) = rest.rsplit_once('_') {
                if !base.is_empty() {
                    if let Ok(pattern) = BindingPattern::from_chars(pat) {
                        return Some(GeneratedName::Demand {
                            base: base.to_owned(),
                            pattern,
                        });
                    }
                }
            }
        }
        if let Some(base) = name.strip_prefix(COMPLEMENT_PREFIX) {
            if !base.is_empty() {
                return Some(GeneratedName::Complement {
                    base: base.to_owned(),
                });
            }
        }
        if let Some(rest) = name.strip_prefix('r') {
            if let Some((rule, index)) = rest.split_once("_i") {
                if let (Some(rule), Some(index)) = (parse_canonical(rule), parse_canonical(index))
                {
                    return Some(GeneratedName::Intermediate { rule, index });
                }
            }
        }
        for (marker, eq) in [("_proj", false), ("_eq", true)] {
            if let Some(pos) = name.rfind(marker) {
                let (base, suffix) = name.split_at(pos);
                let digits = &suffix[marker.len()..];
                if !base.is_empty() {
                    if let Some(index) = parse_canonical(digits) {
                        return Some(if eq {
                            GeneratedName::EqualityFilter {
                                base: base.to_owned(),
                                index,
                            }
                        } else {
                            GeneratedName::Projection {
                                base: base.to_owned(),
                                index,
                            }
                        });
                    }
                }
            }
        }
        None
    }
}

/// Digits without leading zeros, so every parsed name re-renders to itself.
fn parse_canonical(digits: &str) -> Option<usize> {
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

/// `d_<base>_<pattern>`.
pub fn demand_predicate(base: &str, pattern: &BindingPattern) -> String {
    GeneratedName::Demand {
        base: base.to_owned(),
        pattern: pattern.clone(),
    }
    .render()
}

/// `n.<base>`.
pub fn complement_predicate(base: &str) -> String {
    GeneratedName::Complement {
        base: base.to_owned(),
    }
    .render()
}

/// For a demand predicate name, the predicate being demanded with complement
/// unwrapped: `d_p_bf` and `d_n.p_bb` both point at `p`.
pub fn demanded_predicate(name: &str) -> Option<String> {
    match GeneratedName::parse(name)? {
        GeneratedName::Demand { base, .. } => Some(
            base.strip_prefix(COMPLEMENT_PREFIX)
                .map(str::to_owned)
                .unwrap_or(base),
        ),
        _ => None,
    }
}
