//! Set-valued systems: states are nonempty subsets of a base state space and
//! every nonempty subset of a justified set is a successor.

use alloc::collections::BTreeSet;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::fmt;

use crate::system::TransitionSystem;

/// Nonempty set of base states.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiftedState<T: Ord>(BTreeSet<T>);

impl<T: Ord + Clone> LiftedState<T> {
    /// `None` for the empty set.
    pub fn new(set: BTreeSet<T>) -> Option<Self> {
        if set.is_empty() {
            None
        } else {
            Some(LiftedState(set))
        }
    }

    pub fn singleton(x: T) -> Self {
        LiftedState(BTreeSet::from([x]))
    }

    pub fn members(&self) -> &BTreeSet<T> {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: &T) -> bool {
        self.0.contains(x)
    }
}

impl<T: Ord + Clone> FromIterator<T> for LiftedState<T> {
    /// Panics on an empty iterator.
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        LiftedState::new(iter.into_iter().collect()).expect("lifted states are nonempty")
    }
}

impl<T: Ord + fmt::Debug> fmt::Debug for LiftedState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// Largest base size for which all subsets are enumerated.
pub const MAX_SUBSET_BASE: usize = 16;

/// Every nonempty subset of `base`, in lexicographic set order.
///
/// Panics if `base` has more than [`MAX_SUBSET_BASE`] elements.
pub fn nonempty_subsets<T: Ord + Clone>(base: &BTreeSet<T>) -> Vec<LiftedState<T>> {
    assert!(
        base.len() <= MAX_SUBSET_BASE,
        "refusing to enumerate subsets of {} elements",
        base.len()
    );
    let items: Vec<&T> = base.iter().collect();
    let mut out: Vec<LiftedState<T>> = (1u32..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, x)| (*x).clone())
                .collect()
        })
        .collect();
    out.sort();
    out
}

type Justify<S, I> = Rc<dyn Fn(&LiftedState<S>, &I) -> BTreeSet<S>>;

/// A powerset system: `post(x̃, u)` is every nonempty subset of
/// `justify(x̃, u)`, and `u` is disabled at `x̃` when that set is empty.
pub struct Powerset<S: Ord, I> {
    base: Option<Vec<S>>,
    initial: Vec<S>,
    inputs: Vec<I>,
    justify: Justify<S, I>,
}

impl<S: Ord + Clone, I: Clone> Clone for Powerset<S, I> {
    fn clone(&self) -> Self {
        Powerset {
            base: self.base.clone(),
            initial: self.initial.clone(),
            inputs: self.inputs.clone(),
            justify: self.justify.clone(),
        }
    }
}

impl<S, I> Powerset<S, I>
where
    S: Clone + Ord + fmt::Debug,
    I: Clone + Ord + fmt::Debug,
{
    /// `base` is the explicit base state space if known; it enables
    /// exhaustive enumeration of set states.
    pub fn new(
        base: Option<Vec<S>>,
        initial: Vec<S>,
        inputs: Vec<I>,
        justify: impl Fn(&LiftedState<S>, &I) -> BTreeSet<S> + 'static,
    ) -> Self {
        Powerset {
            base,
            initial,
            inputs,
            justify: Rc::new(justify),
        }
    }

    /// The set whose nonempty subsets are the successors.
    pub fn justified(&self, x: &LiftedState<S>, u: &I) -> BTreeSet<S> {
        (self.justify)(x, u)
    }

    /// The largest successor, if `u` is enabled.
    pub fn maximal_post(&self, x: &LiftedState<S>, u: &I) -> Option<LiftedState<S>> {
        LiftedState::new(self.justified(x, u))
    }
}

impl<S, I> TransitionSystem for Powerset<S, I>
where
    S: Clone + Ord + fmt::Debug,
    I: Clone + Ord + fmt::Debug,
{
    type State = LiftedState<S>;
    type Input = I;

    fn initial_states(&self) -> Vec<LiftedState<S>> {
        nonempty_subsets(&self.initial.iter().cloned().collect())
    }

    fn inputs(&self) -> &[I] {
        &self.inputs
    }

    fn contains(&self, x: &LiftedState<S>) -> bool {
        match &self.base {
            Some(b) => x.iter().all(|s| b.contains(s)),
            None => true,
        }
    }

    fn post(&self, x: &LiftedState<S>, u: &I) -> Vec<LiftedState<S>> {
        nonempty_subsets(&self.justified(x, u))
    }

    fn enumerate(&self) -> Option<Vec<LiftedState<S>>> {
        let base = self.base.as_ref()?;
        Some(nonempty_subsets(&base.iter().cloned().collect()))
    }
}

/// The lifted system `𝐒`: a set moves under `u` only if `u` is enabled at
/// every member, and then to any nonempty subset of the union of posts.
pub fn lift<T>(sys: &T) -> Powerset<T::State, T::Input>
where
    T: TransitionSystem + Clone + 'static,
{
    let inner = sys.clone();
    Powerset::new(
        sys.enumerate(),
        sys.initial_states(),
        sys.inputs().to_vec(),
        move |xs, u| {
            let mut out = BTreeSet::new();
            for x in xs.iter() {
                let p = inner.post(x, u);
                if p.is_empty() {
                    return BTreeSet::new();
                }
                out.extend(p);
            }
            out
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::FiniteSystem;
    use alloc::vec;

    fn fork() -> FiniteSystem<u8, char> {
        FiniteSystem::new(
            vec![0, 1, 2],
            vec![0, 1],
            vec!['a', 'b'],
            vec![(0, 'a', 1), (0, 'a', 2), (1, 'a', 0), (1, 'b', 2)],
        )
        .unwrap()
    }

    #[test]
    fn subsets_are_sorted_and_complete() {
        let s = nonempty_subsets(&BTreeSet::from([1, 2, 3]));
        assert_eq!(s.len(), 7);
        assert_eq!(s[0], LiftedState::singleton(1));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lifted_post_needs_input_enabled_everywhere() {
        let l = lift(&fork());
        let both: LiftedState<u8> = [0, 1].into_iter().collect();
        assert_eq!(l.maximal_post(&both, &'a'), Some([0, 1, 2].into_iter().collect()));
        assert_eq!(l.post(&both, &'a').len(), 7);
        assert!(l.post(&both, &'b').is_empty());
        assert_eq!(l.initial_states().len(), 3);
        assert_eq!(l.enumerate().unwrap().len(), 7);
    }

    #[test]
    fn empty_sets_are_rejected() {
        assert!(LiftedState::<u8>::new(BTreeSet::new()).is_none());
    }
}
