use std::fmt;

/// A role name or its inverse.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role {
    pub name: String,
    pub inverse: bool,
}

impl Role {
    pub fn new(name: impl Into<String>) -> Self {
        Role {
            name: name.into(),
            inverse: false,
        }
    }

    pub fn inv(name: impl Into<String>) -> Self {
        Role {
            name: name.into(),
            inverse: true,
        }
    }

    pub fn inverse(&self) -> Role {
        Role {
            name: self.name.clone(),
            inverse: !self.inverse,
        }
    }

    /// Orients a role fact: `R(a, b)` holds iff the stored fact is `name(first, second)`.
    pub fn orient<'a, T: ?Sized>(&self, a: &'a T, b: &'a T) -> (&'a T, &'a T) {
        if self.inverse {
            (b, a)
        } else {
            (a, b)
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}-", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

/// `A` or `∃R`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicConcept {
    Atomic(String),
    Exists(Role),
}

impl BasicConcept {
    pub fn atomic(name: impl Into<String>) -> Self {
        BasicConcept::Atomic(name.into())
    }

    pub fn exists(role: Role) -> Self {
        BasicConcept::Exists(role)
    }
}

impl fmt::Display for BasicConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicConcept::Atomic(name) => write!(f, "{name}"),
            BasicConcept::Exists(role) => write!(f, "ex {role}"),
        }
    }
}

/// A word over roles, the path from an individual to an anonymous element of
/// the canonical model. The empty word stands for the individual itself.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Role>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn first(&self) -> Option<&Role> {
        self.0.first()
    }

    pub fn last(&self) -> Option<&Role> {
        self.0.last()
    }

    pub fn roles(&self) -> &[Role] {
        &self.0
    }

    pub fn extended(&self, role: Role) -> Word {
        let mut roles = self.0.clone();
        roles.push(role);
        Word(roles)
    }

    /// If `self = other · R`, returns `R`.
    pub fn strip_prefix(&self, other: &Word) -> Option<&Role> {
        if self.0.len() == other.0.len() + 1 && self.0.starts_with(&other.0) {
            self.0.last()
        } else {
            None
        }
    }

    /// Compact encoding used inside generated predicate names: `e` for the
    /// empty word, otherwise roles joined by `+` with `~` marking inverses.
    pub fn encode(&self) -> String {
        if self.0.is_empty() {
            return "e".to_string();
        }
        self.0
            .iter()
            .map(|r| {
                if r.inverse {
                    format!("{}~", r.name)
                } else {
                    r.name.clone()
                }
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

// Shorter words first, then lexicographic by role.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        write!(f, "{}", parts.join("·"))
    }
}
