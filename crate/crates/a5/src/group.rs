//! The alternating group A5 as lookup tables.
//!
//! Elements are the 60 even permutations of `{0,..,4}` in lexicographic order
//! of their image arrays, so index 0 is the identity. Products compose right
//! to left: `(a * b)(x) = a(b(x))`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const ORDER: usize = 60;

/// Class sizes in code order.
pub const CLASS_SIZES: [usize; 4] = [1, 15, 20, 24];

/// Conjugacy classes of even permutations under S5 conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Class {
    Identity = 0,
    DoubleTransposition = 1,
    ThreeCycle = 2,
    FiveCycle = 3,
}

impl Class {
    pub const ALL: [Class; 4] = [Class::Identity, Class::DoubleTransposition, Class::ThreeCycle, Class::FiveCycle];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<Class> {
        Class::ALL.get(c as usize).copied()
    }

    pub fn size(self) -> usize {
        CLASS_SIZES[self as usize]
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(u8);

struct Tables {
    perms: [[u8; 5]; ORDER],
    mul: [[u8; ORDER]; ORDER],
    inv: [u8; ORDER],
    class: [Class; ORDER],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(build_tables)
}

fn is_even(p: &[u8; 5]) -> bool {
    let mut inversions = 0;
    for i in 0..5 {
        for j in i + 1..5 {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 0
}

fn cycle_type(p: &[u8; 5]) -> Vec<usize> {
    let mut seen = [false; 5];
    let mut lens = Vec::new();
    for s in 0..5 {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x] as usize;
            len += 1;
        }
        lens.push(len);
    }
    lens.sort_unstable();
    lens
}

fn class_of_perm(p: &[u8; 5]) -> Class {
    match cycle_type(p).as_slice() {
        [1, 1, 1, 1, 1] => Class::Identity,
        [1, 2, 2] => Class::DoubleTransposition,
        [1, 1, 3] => Class::ThreeCycle,
        [5] => Class::FiveCycle,
        other => panic!("odd cycle type {other:?} in A5"),
    }
}

fn build_tables() -> Tables {
    let mut perms = Vec::with_capacity(ORDER);
    // Lexicographic enumeration of S5, keeping the even ones.
    for a in 0..5u8 {
        for b in 0..5u8 {
            for c in 0..5u8 {
                for d in 0..5u8 {
                    for e in 0..5u8 {
                        let p = [a, b, c, d, e];
                        let mut used = [false; 5];
                        if p.iter().all(|&x| !std::mem::replace(&mut used[x as usize], true)) && is_even(&p) {
                            perms.push(p);
                        }
                    }
                }
            }
        }
    }
    assert_eq!(perms.len(), ORDER);
    let index = |p: &[u8; 5]| perms.iter().position(|q| q == p).unwrap() as u8;
    let mut mul = [[0u8; ORDER]; ORDER];
    let mut inv = [0u8; ORDER];
    let mut class = [Class::Identity; ORDER];
    for (i, a) in perms.iter().enumerate() {
        for (j, b) in perms.iter().enumerate() {
            let mut ab = [0u8; 5];
            for x in 0..5 {
                ab[x] = a[b[x] as usize];
            }
            mul[i][j] = index(&ab);
        }
        let mut ai = [0u8; 5];
        for x in 0..5 {
            ai[a[x] as usize] = x as u8;
        }
        inv[i] = index(&ai);
        class[i] = class_of_perm(a);
    }
    Tables { perms: perms.try_into().unwrap(), mul, inv, class }
}

impl Elem {
    pub const IDENTITY: Elem = Elem(0);

    pub fn new(idx: usize) -> Option<Elem> {
        (idx < ORDER).then_some(Elem(idx as u8))
    }

    /// Panics when `idx >= 60`.
    pub fn from_index(idx: usize) -> Elem {
        Elem::new(idx).unwrap_or_else(|| panic!("A5 index {idx} out of range"))
    }

    pub fn from_perm(p: [u8; 5]) -> Option<Elem> {
        tables().perms.iter().position(|q| *q == p).map(|i| Elem(i as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn perm(self) -> [u8; 5] {
        tables().perms[self.index()]
    }

    #[inline]
    pub fn mul(self, other: Elem) -> Elem {
        Elem(tables().mul[self.index()][other.index()])
    }

    #[inline]
    pub fn inv(self) -> Elem {
        Elem(tables().inv[self.index()])
    }

    #[inline]
    pub fn class(self) -> Class {
        tables().class[self.index()]
    }

    /// `g * self * g^-1`
    pub fn conj(self, g: Elem) -> Elem {
        g.mul(self).mul(g.inv())
    }

    pub fn all() -> impl Iterator<Item = Elem> {
        (0..ORDER as u8).map(Elem)
    }

    pub fn is_identity(self) -> bool {
        self == Elem::IDENTITY
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Elem({}:{:?})", self.0, self.perm())
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn classify(g: Elem) -> Class {
    g.class()
}

/// Left-to-right product of a word.
pub fn product(word: &[Elem]) -> Elem {
    word.iter().fold(Elem::IDENTITY, |acc, &g| acc.mul(g))
}

/// Checks associativity over all 60^3 triples, identity and inverses.
/// The result is computed once per process.
pub fn verify_group_axioms() -> Result<(), String> {
    static CHECK: OnceLock<Result<(), String>> = OnceLock::new();
    CHECK
        .get_or_init(|| {
            for a in Elem::all() {
                if a.mul(Elem::IDENTITY) != a || Elem::IDENTITY.mul(a) != a {
                    return Err(format!("identity fails at {a:?}"));
                }
                if a.mul(a.inv()) != Elem::IDENTITY || a.inv().mul(a) != Elem::IDENTITY {
                    return Err(format!("inverse fails at {a:?}"));
                }
                for b in Elem::all() {
                    let ab = a.mul(b);
                    for c in Elem::all() {
                        if ab.mul(c) != a.mul(b.mul(c)) {
                            return Err(format!("associativity fails at ({a}, {b}, {c})"));
                        }
                    }
                }
            }
            Ok(())
        })
        .clone()
}

/// Class sizes tallied over all elements.
pub fn class_tally() -> [usize; 4] {
    let mut t = [0; 4];
    for g in Elem::all() {
        t[g.class() as usize] += 1;
    }
    t
}
