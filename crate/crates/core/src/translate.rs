//! The type-level halves of the forward and reverse AD translations.

use crate::types::{SourceType, TargetType};

/// `(D[τ]₁, D[τ]₂)`: primal and tangent types of forward mode.
pub fn type_translate_fwd(ty: &SourceType) -> (TargetType, TargetType) {
    match ty {
        SourceType::Real(n) => (TargetType::Real(*n), TargetType::Real(*n)),
        SourceType::Unit => (TargetType::Unit, TargetType::Unit),
        SourceType::Prod(a, b) => {
            let (a1, a2) = type_translate_fwd(a);
            let (b1, b2) = type_translate_fwd(b);
            (TargetType::prod(a1, b1), TargetType::prod(a2, b2))
        }
        SourceType::Fun(a, b) => {
            let (a1, a2) = type_translate_fwd(a);
            let (b1, b2) = type_translate_fwd(b);
            (
                TargetType::fun(a1.clone(), TargetType::prod(b1, TargetType::linfun(a2, b2.clone()))),
                TargetType::fun(a1, b2),
            )
        }
    }
}

/// `(D←[τ]₁, D←[τ]₂)`: primal and cotangent types of reverse mode.
pub fn type_translate_rev(ty: &SourceType) -> (TargetType, TargetType) {
    match ty {
        SourceType::Real(n) => (TargetType::Real(*n), TargetType::Real(*n)),
        SourceType::Unit => (TargetType::Unit, TargetType::Unit),
        SourceType::Prod(a, b) => {
            let (a1, a2) = type_translate_rev(a);
            let (b1, b2) = type_translate_rev(b);
            (TargetType::prod(a1, b1), TargetType::prod(a2, b2))
        }
        SourceType::Fun(a, b) => {
            let (a1, a2) = type_translate_rev(a);
            let (b1, b2) = type_translate_rev(b);
            (
                TargetType::fun(a1.clone(), TargetType::prod(b1, TargetType::linfun(b2.clone(), a2))),
                TargetType::map(a1, b2),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: usize) -> TargetType {
        TargetType::real(n)
    }

    #[test]
    fn ground_and_unit_types() {
        for n in 1..5 {
            assert_eq!(type_translate_fwd(&SourceType::real(n)), (r(n), r(n)));
            assert_eq!(type_translate_rev(&SourceType::real(n)), (r(n), r(n)));
        }
        assert_eq!(type_translate_fwd(&SourceType::Unit), (TargetType::Unit, TargetType::Unit));
    }

    #[test]
    fn scalar_function_types() {
        let f = SourceType::fun(SourceType::real(1), SourceType::real(1));
        let primal = TargetType::fun(r(1), TargetType::prod(r(1), TargetType::linfun(r(1), r(1))));
        assert_eq!(type_translate_fwd(&f), (primal.clone(), TargetType::fun(r(1), r(1))));
        assert_eq!(type_translate_rev(&f), (primal, TargetType::map(r(1), r(1))));
    }

    #[test]
    fn products_translate_componentwise() {
        let a = SourceType::real(2);
        let b = SourceType::fun(SourceType::real(1), SourceType::Unit);
        let (a1, a2) = type_translate_rev(&a);
        let (b1, b2) = type_translate_rev(&b);
        assert_eq!(
            type_translate_rev(&SourceType::prod(a, b)),
            (TargetType::prod(a1, b1), TargetType::prod(a2, b2))
        );
    }

    pub(crate) fn arb_first_order() -> impl Strategy<Value = SourceType> {
        let leaf = prop_oneof![(1usize..5).prop_map(SourceType::Real), Just(SourceType::Unit)];
        leaf.prop_recursive(3, 12, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| SourceType::prod(a, b)))
    }

    proptest! {
        #[test]
        fn first_order_tangents_are_the_embedding(t in arb_first_order()) {
            prop_assert_eq!(type_translate_fwd(&t), (t.to_target(), t.to_target()));
            prop_assert_eq!(type_translate_rev(&t), (t.to_target(), t.to_target()));
        }
    }
}
