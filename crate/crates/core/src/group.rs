//! Grading groups.
//!
//! Finite groups are given by a validated Cayley table with the identity at
//! index 0. Infinite groups are limited to free abelian groups Z^k, and both
//! kinds combine through direct products.

use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is not square")]
    NotSquare,
    #[error("table entry {value} at ({row}, {col}) is outside [0, {order})")]
    EntryOutOfRange { row: usize, col: usize, value: usize, order: usize },
    #[error("table is not a Latin square: repeated entry in {line}")]
    NotLatinSquare { line: String },
    #[error("element 0 is not a two-sided identity")]
    NoIdentityAtZero,
    #[error("table has no identity element")]
    NoIdentity,
    #[error("associativity fails on ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("element {0} has no two-sided inverse")]
    MissingInverse(usize),
    #[error("element {0} does not belong to the group")]
    ElementOutOfRange(String),
    #[error("cannot parse group data: {0}")]
    Parse(String),
}

/// An element of a [`Group`]. Its meaning depends on the group it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// Index into the element list of a finite group (0 is the identity).
    Index(usize),
    /// Coordinates in Z^k.
    Vector(Vec<i64>),
    /// One component per factor of a direct product.
    Tuple(Vec<GroupElement>),
}

impl GroupElement {
    /// JSON encoding: index, integer array, or array of factor encodings.
    pub fn to_json(&self) -> Value {
        match self {
            GroupElement::Index(i) => json!(i),
            GroupElement::Vector(v) => json!(v),
            GroupElement::Tuple(parts) => Value::Array(parts.iter().map(GroupElement::to_json).collect()),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Index(i) => write!(f, "{i}"),
            GroupElement::Vector(v) => write!(f, "{v:?}"),
            GroupElement::Tuple(parts) => {
                write!(f, "(")?;
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A finite group stored as a Cayley table.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    inverses: Vec<usize>,
    names: Option<Vec<String>>,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.table == other.table
    }
}

impl Eq for FiniteGroup {}

impl FiniteGroup {
    /// Validate a Cayley table whose identity is element 0.
    pub fn from_table(raw: &[Vec<usize>], names: Option<Vec<String>>) -> Result<Self, GroupError> {
        let order = raw.len();
        if order == 0 || raw.iter().any(|row| row.len() != order) {
            return Err(GroupError::NotSquare);
        }
        for (r, row) in raw.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v >= order {
                    return Err(GroupError::EntryOutOfRange { row: r, col: c, value: v, order });
                }
            }
        }
        if let Some(n) = &names {
            if n.len() != order {
                return Err(GroupError::Parse("names length differs from order".into()));
            }
        }
        let table: Vec<usize> = raw.iter().flatten().copied().collect();
        let at = |a: usize, b: usize| table[a * order + b];

        for r in 0..order {
            let mut seen = vec![false; order];
            for c in 0..order {
                let v = at(r, c);
                if seen[v] {
                    return Err(GroupError::NotLatinSquare { line: format!("row {r}") });
                }
                seen[v] = true;
            }
        }
        for c in 0..order {
            let mut seen = vec![false; order];
            for r in 0..order {
                let v = at(r, c);
                if seen[v] {
                    return Err(GroupError::NotLatinSquare { line: format!("column {c}") });
                }
                seen[v] = true;
            }
        }
        if (0..order).any(|x| at(0, x) != x || at(x, 0) != x) {
            return Err(GroupError::NoIdentityAtZero);
        }
        for a in 0..order {
            for b in 0..order {
                let ab = at(a, b);
                for c in 0..order {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        let mut inverses = Vec::with_capacity(order);
        for a in 0..order {
            match (0..order).find(|&b| at(a, b) == 0 && at(b, a) == 0) {
                Some(b) => inverses.push(b),
                None => return Err(GroupError::MissingInverse(a)),
            }
        }
        Ok(FiniteGroup { order, table, inverses, names })
    }

    /// Like [`FiniteGroup::from_table`] but accepts an identity at any index,
    /// swapping it with element 0 first.
    pub fn from_table_relabeled(raw: &[Vec<usize>], names: Option<Vec<String>>) -> Result<Self, GroupError> {
        let order = raw.len();
        if order == 0 || raw.iter().any(|row| row.len() != order) {
            return Err(GroupError::NotSquare);
        }
        let id = (0..order)
            .find(|&e| (0..order).all(|x| raw[e][x] == x && raw[x][e] == x))
            .ok_or(GroupError::NoIdentity)?;
        let swap = |x: usize| {
            if x == id {
                0
            } else if x == 0 {
                id
            } else {
                x
            }
        };
        let relabeled: Vec<Vec<usize>> = (0..order)
            .map(|a| (0..order).map(|b| swap(raw[swap(a)][swap(b)])).collect())
            .collect();
        let names = names.map(|mut n| {
            n.swap(0, id);
            n
        });
        Self::from_table(&relabeled, names)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }
}

/// A grading group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Group {
    Finite(FiniteGroup),
    FreeAbelian { rank: usize },
    Product(Vec<Group>),
}

impl Group {
    pub fn from_table(raw: &[Vec<usize>]) -> Result<Self, GroupError> {
        FiniteGroup::from_table(raw, None).map(Group::Finite)
    }

    pub fn cyclic(n: usize) -> Self {
        let raw: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Group::Finite(FiniteGroup::from_table(&raw, None).expect("cyclic table is a group"))
    }

    /// Z2 x Z2 with elements e, a, b, ab at indices 0..4.
    pub fn klein_four() -> Self {
        let raw = vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]];
        let names = ["e", "a", "b", "ab"].iter().map(|s| s.to_string()).collect();
        Group::Finite(FiniteGroup::from_table(&raw, Some(names)).expect("Klein table is a group"))
    }

    /// S3 with elements e, (12), (13), (23), (123), (132); products compose
    /// right to left, `(gh)(x) = g(h(x))`.
    pub fn symmetric3() -> Self {
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("closed under composition");
        let raw: Vec<Vec<usize>> = perms
            .iter()
            .map(|g| perms.iter().map(|h| index([g[h[0]], g[h[1]], g[h[2]]])).collect())
            .collect();
        let names = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"].iter().map(|s| s.to_string()).collect();
        Group::Finite(FiniteGroup::from_table(&raw, Some(names)).expect("S3 table is a group"))
    }

    pub fn free_abelian(rank: usize) -> Self {
        Group::FreeAbelian { rank }
    }

    pub fn product(factors: Vec<Group>) -> Self {
        Group::Product(factors)
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            Group::Finite(_) => GroupElement::Index(0),
            Group::FreeAbelian { rank } => GroupElement::Vector(vec![0; *rank]),
            Group::Product(fs) => GroupElement::Tuple(fs.iter().map(Group::identity).collect()),
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (Group::Finite(fg), GroupElement::Index(i)) => *i < fg.order,
            (Group::FreeAbelian { rank }, GroupElement::Vector(v)) => v.len() == *rank,
            (Group::Product(fs), GroupElement::Tuple(parts)) => {
                fs.len() == parts.len() && fs.iter().zip(parts).all(|(f, p)| f.contains(p))
            }
            _ => false,
        }
    }

    fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(GroupError::ElementOutOfRange(g.to_string()))
        }
    }

    /// The product `gh`.
    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.op(g, h))
    }

    /// The inverse of `g`.
    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        Ok(self.inverse(g))
    }

    /// Unchecked product for elements already known to belong to the group.
    ///
    /// Panics if either element has the wrong shape for this group.
    pub fn op(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (self, g, h) {
            (Group::Finite(fg), GroupElement::Index(a), GroupElement::Index(b)) => GroupElement::Index(fg.mul(*a, *b)),
            (Group::FreeAbelian { .. }, GroupElement::Vector(a), GroupElement::Vector(b)) => {
                GroupElement::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Group::Product(fs), GroupElement::Tuple(a), GroupElement::Tuple(b)) => {
                GroupElement::Tuple(fs.iter().zip(a.iter().zip(b)).map(|(f, (x, y))| f.op(x, y)).collect())
            }
            _ => panic!("element {g} or {h} does not belong to the group"),
        }
    }

    /// Unchecked inverse; panics on foreign elements.
    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        match (self, g) {
            (Group::Finite(fg), GroupElement::Index(a)) => GroupElement::Index(fg.inv(*a)),
            (Group::FreeAbelian { .. }, GroupElement::Vector(a)) => GroupElement::Vector(a.iter().map(|x| -x).collect()),
            (Group::Product(fs), GroupElement::Tuple(a)) => {
                GroupElement::Tuple(fs.iter().zip(a).map(|(f, x)| f.inverse(x)).collect())
            }
            _ => panic!("element {g} does not belong to the group"),
        }
    }

    /// Product of a sequence of elements, left to right.
    pub fn product_of<'a>(&self, items: impl IntoIterator<Item = &'a GroupElement>) -> GroupElement {
        items.into_iter().fold(self.identity(), |acc, g| self.op(&acc, g))
    }

    /// `g h g^-1`.
    pub fn conjugate(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        self.op(&self.op(g, h), &self.inverse(g))
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        *g == self.identity()
    }

    /// Number of elements, or `None` for infinite groups.
    pub fn order(&self) -> Option<usize> {
        match self {
            Group::Finite(fg) => Some(fg.order),
            Group::FreeAbelian { rank } => (*rank == 0).then_some(1),
            Group::Product(fs) => fs.iter().map(Group::order).try_fold(1usize, |acc, o| o.map(|o| acc * o)),
        }
    }

    /// All elements of a finite group, identity first.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        match self {
            Group::Finite(fg) => Some((0..fg.order).map(GroupElement::Index).collect()),
            Group::FreeAbelian { rank } => (*rank == 0).then(|| vec![GroupElement::Vector(vec![])]),
            Group::Product(fs) => {
                let mut acc: Vec<Vec<GroupElement>> = vec![vec![]];
                for f in fs {
                    let elems = f.elements()?;
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            elems.iter().map(move |e| {
                                let mut p = prefix.clone();
                                p.push(e.clone());
                                p
                            })
                        })
                        .collect();
                }
                Some(acc.into_iter().map(GroupElement::Tuple).collect())
            }
        }
    }

    /// Order of `g`, searched up to `limit`.
    pub fn element_order(&self, g: &GroupElement, limit: usize) -> Option<usize> {
        let e = self.identity();
        let mut x = g.clone();
        for k in 1..=limit {
            if x == e {
                return Some(k);
            }
            x = self.op(&x, g);
        }
        None
    }

    pub fn to_json(&self) -> Value {
        match self {
            Group::Finite(fg) => {
                let mut v = json!({"kind": "finite", "order": fg.order, "mul": fg.table()});
                if let Some(n) = &fg.names {
                    v["names"] = json!(n);
                }
                v
            }
            Group::FreeAbelian { rank } => json!({"kind": "free_abelian", "rank": rank}),
            Group::Product(fs) => json!({"kind": "product", "factors": fs.iter().map(Group::to_json).collect::<Vec<_>>()}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, GroupError> {
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| GroupError::Parse("missing kind".into()))?;
        match kind {
            "finite" => {
                let table: Vec<Vec<usize>> = serde_json::from_value(v.get("mul").cloned().unwrap_or(Value::Null))
                    .map_err(|e| GroupError::Parse(format!("mul: {e}")))?;
                if let Some(order) = v.get("order").and_then(Value::as_u64) {
                    if order as usize != table.len() {
                        return Err(GroupError::Parse("order differs from table size".into()));
                    }
                }
                let names = match v.get("names") {
                    Some(n) if !n.is_null() => {
                        Some(serde_json::from_value(n.clone()).map_err(|e| GroupError::Parse(format!("names: {e}")))?)
                    }
                    _ => None,
                };
                FiniteGroup::from_table(&table, names).map(Group::Finite)
            }
            "free_abelian" => {
                let rank = v.get("rank").and_then(Value::as_u64).ok_or_else(|| GroupError::Parse("missing rank".into()))?;
                Ok(Group::FreeAbelian { rank: rank as usize })
            }
            "product" => {
                let fs = v
                    .get("factors")
                    .and_then(Value::as_array)
                    .ok_or_else(|| GroupError::Parse("missing factors".into()))?;
                fs.iter().map(Group::from_json).collect::<Result<Vec<_>, _>>().map(Group::Product)
            }
            "cyclic" => {
                let n = v.get("order").and_then(Value::as_u64).ok_or_else(|| GroupError::Parse("missing order".into()))?;
                if n == 0 {
                    return Err(GroupError::Parse("cyclic group of order 0".into()));
                }
                Ok(Group::cyclic(n as usize))
            }
            "klein_four" => Ok(Group::klein_four()),
            "symmetric3" => Ok(Group::symmetric3()),
            other => Err(GroupError::Parse(format!("unknown group kind {other}"))),
        }
    }

    /// Element encoding: index for finite groups, integer array for Z^k,
    /// array of factor encodings for products.
    pub fn element_to_json(&self, g: &GroupElement) -> Value {
        g.to_json()
    }

    /// Decode an element; finite-group elements may also be given by name.
    pub fn parse_element(&self, v: &Value) -> Result<GroupElement, GroupError> {
        let bad = || GroupError::ElementOutOfRange(v.to_string());
        let g = match self {
            Group::Finite(fg) => match v {
                Value::Number(n) => GroupElement::Index(n.as_u64().ok_or_else(bad)? as usize),
                Value::String(s) => {
                    let names = fg.names.as_ref().ok_or_else(bad)?;
                    GroupElement::Index(names.iter().position(|n| n == s).ok_or_else(bad)?)
                }
                _ => return Err(bad()),
            },
            Group::FreeAbelian { .. } => {
                let coords: Vec<i64> = serde_json::from_value(v.clone()).map_err(|_| bad())?;
                GroupElement::Vector(coords)
            }
            Group::Product(fs) => {
                let parts = v.as_array().ok_or_else(bad)?;
                if parts.len() != fs.len() {
                    return Err(bad());
                }
                GroupElement::Tuple(fs.iter().zip(parts).map(|(f, p)| f.parse_element(p)).collect::<Result<_, _>>()?)
            }
        };
        self.check(&g)?;
        Ok(g)
    }

    /// Human-readable name of an element (falls back to its encoding).
    pub fn element_name(&self, g: &GroupElement) -> String {
        match (self, g) {
            (Group::Finite(fg), GroupElement::Index(i)) => match &fg.names {
                Some(n) if *i < n.len() => n[*i].clone(),
                _ => i.to_string(),
            },
            (Group::Product(fs), GroupElement::Tuple(parts)) => {
                let inner: Vec<String> = fs.iter().zip(parts).map(|(f, p)| f.element_name(p)).collect();
                format!("({})", inner.join(", "))
            }
            _ => g.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(i: usize) -> GroupElement {
        GroupElement::Index(i)
    }

    #[test]
    fn klein_table_validates() {
        let g = Group::from_table(&[vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]]).unwrap();
        assert_eq!(g.order(), Some(4));
        assert_eq!(g.mul(&idx(1), &idx(2)).unwrap(), idx(3));
    }

    #[test]
    fn repeated_row_entry_is_not_latin() {
        assert!(matches!(Group::from_table(&[vec![0, 1], vec![1, 1]]), Err(GroupError::NotLatinSquare { .. })));
    }

    #[test]
    fn identity_must_sit_at_zero() {
        // Z2 with the identity at index 1.
        let raw = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(Group::from_table(&raw), Err(GroupError::NoIdentityAtZero));
        let g = FiniteGroup::from_table_relabeled(&raw, None).unwrap();
        assert_eq!(g.table(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn non_associative_latin_square() {
        // A loop of order 5 that is not a group.
        let raw = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(Group::from_table(&raw), Err(GroupError::NotAssociative(..))));
    }

    #[test]
    fn out_of_range_entries() {
        assert!(matches!(Group::from_table(&[vec![0, 2], vec![1, 0]]), Err(GroupError::EntryOutOfRange { .. })));
        let z4 = Group::cyclic(4);
        assert!(matches!(z4.mul(&idx(4), &idx(0)), Err(GroupError::ElementOutOfRange(_))));
        assert!(z4.inv(&GroupElement::Vector(vec![1])).is_err());
    }

    #[test]
    fn identity_and_inverses() {
        let z4 = Group::cyclic(4);
        assert_eq!(z4.inv(&idx(1)).unwrap(), idx(3));
        assert_eq!(z4.inv(&idx(0)).unwrap(), idx(0));
        for g in z4.elements().unwrap() {
            assert_eq!(z4.mul(&g, &z4.identity()).unwrap(), g);
        }
    }

    #[test]
    fn free_abelian_arithmetic() {
        let z = Group::free_abelian(1);
        let a = GroupElement::Vector(vec![3]);
        let b = GroupElement::Vector(vec![-5]);
        assert_eq!(z.mul(&a, &b).unwrap(), GroupElement::Vector(vec![-2]));
        assert_eq!(z.inv(&a).unwrap(), GroupElement::Vector(vec![-3]));
    }

    /// Compose permutations of {0,1,2} directly, independent of the table code.
    fn s3_oracle() -> Vec<Vec<usize>> {
        let perms = [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
        let mut table = vec![vec![0; 6]; 6];
        for (i, g) in perms.iter().enumerate() {
            for (j, h) in perms.iter().enumerate() {
                let mut gh = [0usize; 3];
                for x in 0..3 {
                    gh[x] = g[h[x]];
                }
                table[i][j] = perms.iter().position(|p| *p == gh).unwrap();
            }
        }
        table
    }

    #[test]
    fn s3_matches_permutation_composition() {
        let table = s3_oracle();
        let g = Group::from_table(&table).unwrap();
        assert_eq!(g, Group::symmetric3());
        // (123)^-1 = (132): search the table for the element completing the identity.
        let inv = (0..6).find(|&h| table[4][h] == 0).unwrap();
        assert_eq!(inv, 5);
        assert_eq!(g.inv(&idx(4)).unwrap(), idx(5));
        // nonabelian
        assert_ne!(g.op(&idx(1), &idx(2)), g.op(&idx(2), &idx(1)));
    }

    #[test]
    fn exhaustive_associativity_and_inverses() {
        let groups = [Group::cyclic(12), Group::symmetric3(), Group::klein_four(), Group::cyclic(7)];
        for g in &groups {
            let els = g.elements().unwrap();
            for a in &els {
                assert_eq!(g.op(a, &g.inverse(a)), g.identity());
                assert_eq!(g.op(&g.inverse(a), a), g.identity());
                for b in &els {
                    for c in &els {
                        assert_eq!(g.op(&g.op(a, b), c), g.op(a, &g.op(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn product_groups() {
        let g = Group::product(vec![Group::cyclic(2), Group::free_abelian(1)]);
        let x = GroupElement::Tuple(vec![idx(1), GroupElement::Vector(vec![2])]);
        let y = g.op(&x, &x);
        assert_eq!(y, GroupElement::Tuple(vec![idx(0), GroupElement::Vector(vec![4])]));
        assert_eq!(g.order(), None);
        let json = g.element_to_json(&x);
        assert_eq!(json, json!([1, [2]]));
        assert_eq!(g.parse_element(&json).unwrap(), x);
        let h = Group::product(vec![Group::cyclic(2), Group::cyclic(3)]);
        assert_eq!(h.elements().unwrap().len(), 6);
    }

    #[test]
    fn json_round_trip() {
        for g in [Group::symmetric3(), Group::free_abelian(2), Group::product(vec![Group::cyclic(4), Group::klein_four()])] {
            assert_eq!(Group::from_json(&g.to_json()).unwrap(), g);
        }
        let s3 = Group::symmetric3();
        assert_eq!(s3.parse_element(&json!("(123)")).unwrap(), idx(4));
        assert!(s3.parse_element(&json!(6)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn free_abelian_is_commutative(a in proptest::collection::vec(-100i64..100, 3), b in proptest::collection::vec(-100i64..100, 3)) {
                let z = Group::free_abelian(3);
                let (x, y) = (GroupElement::Vector(a), GroupElement::Vector(b));
                prop_assert_eq!(z.op(&x, &y), z.op(&y, &x));
                prop_assert_eq!(z.op(&x, &z.inverse(&x)), z.identity());
            }
        }
    }
}
