//! Transition systems `(X, X0, U, r)` and plants with outputs.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::error::{Error, Result};

/// A nondeterministic transition system with a finite input set.
///
/// Implementations may be explicit ([`FiniteSystem`]) or generator-backed,
/// in which case only successor enumeration is available.
pub trait TransitionSystem {
    type State: Clone + Ord + Debug;
    type Input: Clone + Ord + Debug;

    fn initial_states(&self) -> Vec<Self::State>;

    fn inputs(&self) -> &[Self::Input];

    /// Membership predicate for the state set.
    fn contains(&self, x: &Self::State) -> bool;

    /// `r(x, u)`; empty when `u` is not enabled at `x`. Unchecked.
    fn post(&self, x: &Self::State, u: &Self::Input) -> Vec<Self::State>;

    /// `U(x)` without a membership check.
    fn enabled(&self, x: &Self::State) -> Vec<Self::Input> {
        self.inputs()
            .iter()
            .filter(|u| !self.post(x, u).is_empty())
            .cloned()
            .collect()
    }

    /// `U(x) = { u | r(x, u) != {} }`.
    fn enabled_inputs(&self, x: &Self::State) -> Result<Vec<Self::Input>> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("unknown state {x:?}")));
        }
        Ok(self.enabled(x))
    }

    /// Checked version of [`TransitionSystem::post`].
    fn successors(&self, x: &Self::State, u: &Self::Input) -> Result<Vec<Self::State>> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("unknown state {x:?}")));
        }
        if !self.inputs().contains(u) {
            return Err(Error::Domain(format!("unknown input {u:?}")));
        }
        Ok(self.post(x, u))
    }

    /// The full state list when the system is explicit; `None` for
    /// generator-backed systems.
    fn enumerate(&self) -> Option<Vec<Self::State>> {
        None
    }
}

/// Systems whose state set can be enumerated.
pub trait FiniteStates: TransitionSystem {
    fn states(&self) -> Vec<Self::State>;
}

/// A plant with outputs `(S, Y, H)`.
pub trait Outputs: TransitionSystem {
    type Output: Clone + Ord + Debug;

    /// The output map `H`; total on the state set.
    fn output(&self, x: &Self::State) -> Self::Output;
}

impl<T: TransitionSystem + ?Sized> TransitionSystem for &T {
    type State = T::State;
    type Input = T::Input;
    fn initial_states(&self) -> Vec<T::State> {
        (**self).initial_states()
    }
    fn inputs(&self) -> &[T::Input] {
        (**self).inputs()
    }
    fn contains(&self, x: &T::State) -> bool {
        (**self).contains(x)
    }
    fn post(&self, x: &T::State, u: &T::Input) -> Vec<T::State> {
        (**self).post(x, u)
    }
    fn enumerate(&self) -> Option<Vec<T::State>> {
        (**self).enumerate()
    }
}

impl<T: FiniteStates + ?Sized> FiniteStates for &T {
    fn states(&self) -> Vec<T::State> {
        (**self).states()
    }
}

impl<T: Outputs + ?Sized> Outputs for &T {
    type Output = T::Output;
    fn output(&self, x: &T::State) -> T::Output {
        (**self).output(x)
    }
}

/// Explicit finite transition system with indexed states and inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSystem<S, I> {
    states: Vec<S>,
    index: BTreeMap<S, usize>,
    initial: Vec<usize>,
    inputs: Vec<I>,
    input_index: BTreeMap<I, usize>,
    // trans[state][input] = sorted successor indices
    trans: Vec<Vec<Vec<usize>>>,
}

impl<S: Clone + Ord + Debug, I: Clone + Ord + Debug> FiniteSystem<S, I> {
    /// Builds a system, validating `X0 ⊆ X`, `U` membership and that every
    /// successor lies in `X`. State numbering follows the order of `states`.
    pub fn new(
        states: Vec<S>,
        initial: Vec<S>,
        inputs: Vec<I>,
        transitions: impl IntoIterator<Item = (S, I, S)>,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::Invalid(format!("states[{i}]: duplicate state {s:?}")));
            }
        }
        let mut input_index = BTreeMap::new();
        for (i, u) in inputs.iter().enumerate() {
            if input_index.insert(u.clone(), i).is_some() {
                return Err(Error::Invalid(format!("inputs[{i}]: duplicate input {u:?}")));
            }
        }
        let mut init = Vec::with_capacity(initial.len());
        for (i, s) in initial.iter().enumerate() {
            match index.get(s) {
                Some(&k) => init.push(k),
                None => {
                    return Err(Error::Invalid(format!(
                        "initial[{i}]: {s:?} is not a state"
                    )))
                }
            }
        }
        init.sort_unstable();
        init.dedup();
        let mut trans = alloc::vec![alloc::vec![Vec::new(); inputs.len()]; states.len()];
        for (src, u, dst) in transitions {
            let si = *index
                .get(&src)
                .ok_or_else(|| Error::Invalid(format!("trans: unknown source state {src:?}")))?;
            let ui = *input_index
                .get(&u)
                .ok_or_else(|| Error::Invalid(format!("trans: unknown input {u:?}")))?;
            let di = *index.get(&dst).ok_or_else(|| {
                Error::Invalid(format!("trans[{src:?}|{u:?}]: successor {dst:?} is not a state"))
            })?;
            trans[si][ui].push(di);
        }
        for row in trans.iter_mut() {
            for succ in row.iter_mut() {
                succ.sort_unstable();
                succ.dedup();
            }
        }
        Ok(FiniteSystem {
            states,
            index,
            initial: init,
            inputs,
            input_index,
            trans,
        })
    }

    /// Materializes the part of `sys` reachable from its initial states,
    /// numbering states in breadth-first order.
    pub fn reachable<T>(sys: &T) -> Self
    where
        T: TransitionSystem<State = S, Input = I>,
    {
        Self::reachable_bounded(sys, usize::MAX).0
    }

    /// Like [`FiniteSystem::reachable`] but stops expanding after `depth`
    /// steps. Returns the system and whether the frontier was cut off.
    pub fn reachable_bounded<T>(sys: &T, depth: usize) -> (Self, bool)
    where
        T: TransitionSystem<State = S, Input = I>,
    {
        let mut states: Vec<S> = Vec::new();
        let mut index: BTreeMap<S, usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        let mut init = Vec::new();
        for x in sys.initial_states() {
            if !index.contains_key(&x) {
                index.insert(x.clone(), states.len());
                init.push(states.len());
                queue.push_back((states.len(), 0usize));
                states.push(x);
            }
        }
        let inputs: Vec<I> = sys.inputs().to_vec();
        let mut trans: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut truncated = false;
        while let Some((i, dist)) = queue.pop_front() {
            if trans.len() <= i {
                trans.resize(i + 1, alloc::vec![Vec::new(); inputs.len()]);
            }
            if dist >= depth {
                truncated = true;
                continue;
            }
            let x = states[i].clone();
            for (ui, u) in inputs.iter().enumerate() {
                let mut succ = Vec::new();
                for y in sys.post(&x, u) {
                    let j = match index.get(&y) {
                        Some(&j) => j,
                        None => {
                            let j = states.len();
                            index.insert(y.clone(), j);
                            states.push(y);
                            queue.push_back((j, dist + 1));
                            j
                        }
                    };
                    succ.push(j);
                }
                succ.sort_unstable();
                succ.dedup();
                trans[i][ui] = succ;
            }
        }
        trans.resize(states.len(), alloc::vec![Vec::new(); inputs.len()]);
        let input_index = inputs.iter().cloned().enumerate().map(|(i, u)| (u, i)).collect();
        (
            FiniteSystem {
                states,
                index,
                initial: init,
                inputs,
                input_index,
                trans,
            },
            truncated,
        )
    }

    /// Copies an enumerable system wholesale, states in the order it reports.
    pub fn from_finite<T>(sys: &T) -> Self
    where
        T: FiniteStates<State = S, Input = I>,
    {
        let states = sys.states();
        let inputs: Vec<I> = sys.inputs().to_vec();
        let mut edges = Vec::new();
        for x in &states {
            for u in &inputs {
                for y in sys.post(x, u) {
                    edges.push((x.clone(), u.clone(), y));
                }
            }
        }
        Self::new(states, sys.initial_states(), inputs, edges)
            .expect("enumerable system violates its own invariants")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &S {
        &self.states[i]
    }

    pub fn state_list(&self) -> &[S] {
        &self.states
    }

    pub fn index_of(&self, x: &S) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn input_index(&self, u: &I) -> Option<usize> {
        self.input_index.get(u).copied()
    }

    pub fn initial_indices(&self) -> &[usize] {
        &self.initial
    }

    pub fn post_idx(&self, state: usize, input: usize) -> &[usize] {
        &self.trans[state][input]
    }

    /// All transitions as `(source, input, target)` index triples.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.trans.iter().enumerate().flat_map(|(s, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(u, succ)| succ.iter().map(move |&t| (s, u, t)))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }
}

impl<S: Clone + Ord + Debug, I: Clone + Ord + Debug> TransitionSystem for FiniteSystem<S, I> {
    type State = S;
    type Input = I;

    fn initial_states(&self) -> Vec<S> {
        self.initial.iter().map(|&i| self.states[i].clone()).collect()
    }

    fn inputs(&self) -> &[I] {
        &self.inputs
    }

    fn contains(&self, x: &S) -> bool {
        self.index.contains_key(x)
    }

    fn post(&self, x: &S, u: &I) -> Vec<S> {
        match (self.index.get(x), self.input_index.get(u)) {
            (Some(&si), Some(&ui)) => self.trans[si][ui]
                .iter()
                .map(|&j| self.states[j].clone())
                .collect(),
            _ => Vec::new(),
        }
    }

    fn enumerate(&self) -> Option<Vec<S>> {
        Some(self.states.clone())
    }
}

impl<S: Clone + Ord + Debug, I: Clone + Ord + Debug> FiniteStates for FiniteSystem<S, I> {
    fn states(&self) -> Vec<S> {
        self.states.clone()
    }
}

/// A finite system together with a total output map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePlant<S, I, Y> {
    system: FiniteSystem<S, I>,
    outputs: Vec<Y>,
}

impl<S, I, Y> FinitePlant<S, I, Y>
where
    S: Clone + Ord + Debug,
    I: Clone + Ord + Debug,
    Y: Clone + Ord + Debug,
{
    /// Fails if some state has no output.
    pub fn new(system: FiniteSystem<S, I>, outputs: &BTreeMap<S, Y>) -> Result<Self> {
        let mut ys = Vec::with_capacity(system.len());
        for s in system.state_list() {
            match outputs.get(s) {
                Some(y) => ys.push(y.clone()),
                None => return Err(Error::Invalid(format!("outputs: no output for state {s:?}"))),
            }
        }
        Ok(FinitePlant { system, outputs: ys })
    }

    pub fn system(&self) -> &FiniteSystem<S, I> {
        &self.system
    }

    pub fn output_values(&self) -> &[Y] {
        &self.outputs
    }
}

impl<S, I, Y> TransitionSystem for FinitePlant<S, I, Y>
where
    S: Clone + Ord + Debug,
    I: Clone + Ord + Debug,
    Y: Clone + Ord + Debug,
{
    type State = S;
    type Input = I;
    fn initial_states(&self) -> Vec<S> {
        self.system.initial_states()
    }
    fn inputs(&self) -> &[I] {
        self.system.inputs()
    }
    fn contains(&self, x: &S) -> bool {
        self.system.contains(x)
    }
    fn post(&self, x: &S, u: &I) -> Vec<S> {
        self.system.post(x, u)
    }
    fn enumerate(&self) -> Option<Vec<S>> {
        Some(self.system.states())
    }
}

impl<S, I, Y> FiniteStates for FinitePlant<S, I, Y>
where
    S: Clone + Ord + Debug,
    I: Clone + Ord + Debug,
    Y: Clone + Ord + Debug,
{
    fn states(&self) -> Vec<S> {
        self.system.states()
    }
}

impl<S, I, Y> Outputs for FinitePlant<S, I, Y>
where
    S: Clone + Ord + Debug,
    I: Clone + Ord + Debug,
    Y: Clone + Ord + Debug,
{
    type Output = Y;
    fn output(&self, x: &S) -> Y {
        let i = self.system.index_of(x).expect("output of unknown state");
        self.outputs[i].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toy() -> FiniteSystem<u32, char> {
        FiniteSystem::new(
            vec![0, 1, 2],
            vec![0],
            vec!['a', 'b'],
            vec![(0, 'a', 1), (0, 'a', 2), (1, 'b', 0), (0, 'b', 0)],
        )
        .unwrap()
    }

    #[test]
    fn enabled_inputs_scan_the_table() {
        let s = toy();
        assert_eq!(s.enabled_inputs(&0).unwrap(), vec!['a', 'b']);
        assert_eq!(s.enabled_inputs(&1).unwrap(), vec!['b']);
        assert!(s.enabled_inputs(&2).unwrap().is_empty());
        assert!(matches!(s.enabled_inputs(&7), Err(Error::Domain(_))));
    }

    #[test]
    fn post_returns_successor_set() {
        let s = toy();
        assert_eq!(s.post(&0, &'a'), vec![1, 2]);
        assert!(s.post(&2, &'a').is_empty());
        assert!(matches!(s.successors(&0, &'z'), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_models_report_first_violation() {
        let e = FiniteSystem::new(vec![0u32, 1], vec![5], vec!['a'], vec![]).unwrap_err();
        assert!(matches!(e, Error::Invalid(ref m) if m.starts_with("initial[0]")));
        let e = FiniteSystem::new(vec![0u32], vec![0], vec!['a'], vec![(0, 'a', 3)]).unwrap_err();
        assert!(matches!(e, Error::Invalid(ref m) if m.contains("successor 3")));
        let e = FiniteSystem::new(vec![0u32, 0], vec![], vec!['a'], vec![]).unwrap_err();
        assert!(matches!(e, Error::Invalid(_)));
    }

    #[test]
    fn reachable_part_drops_isolated_states() {
        let s = FiniteSystem::new(
            vec![0u32, 1, 2, 3],
            vec![0],
            vec!['a'],
            vec![(0, 'a', 1), (1, 'a', 0), (3, 'a', 2)],
        )
        .unwrap();
        let r = FiniteSystem::reachable(&s);
        assert_eq!(r.state_list(), &[0, 1]);
        assert_eq!(r.post(&1, &'a'), vec![0]);
        let (b, cut) = FiniteSystem::reachable_bounded(&s, 0);
        assert_eq!(b.len(), 1);
        assert!(cut);
    }

    #[test]
    fn plant_outputs_must_be_total() {
        let mut ys = BTreeMap::new();
        ys.insert(0u32, 1i64);
        ys.insert(1, 0);
        assert!(FinitePlant::new(toy(), &ys).is_err());
        ys.insert(2, 5);
        let p = FinitePlant::new(toy(), &ys).unwrap();
        assert_eq!(p.output(&2), 5);
    }
}
