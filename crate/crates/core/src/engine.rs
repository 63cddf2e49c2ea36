//! Three-phase execution of work over an entity array.
//!
//! A pass runs `setup` once, `per_element` once per element of the selected
//! array, and `teardown` once after every element finished. With more than
//! one worker the per-element phase runs data-parallel on a rayon pool sized
//! to the worker count (dynamic work-stealing over index chunks of
//! `max(1, n / (8 × workers))`); with one worker, or when the crate is built
//! without the `parallel` feature, it runs sequentially in ascending index
//! order.
//!
//! Isolation contract: `per_element(model, i)` may read anything in the
//! model (including stores filled by earlier passes) but must write only to
//! element `i`'s own store. Passes that obey the contract produce the same
//! result for any worker count. Cross-element reductions belong in
//! `teardown`, as a fixed-order fold over per-element partials, so that
//! floating-point sums do not depend on scheduling.

use crate::datamodel::RatingsModel;
use crate::error::{CfError, Result};

/// Selects the entity array a pass iterates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassTarget {
    Users,
    TestUsers,
    Items,
    TestItems,
}

impl PassTarget {
    /// Length of the selected array; `per_element` indices range over
    /// `0..len`.
    pub fn len(self, model: &RatingsModel) -> usize {
        match self {
            PassTarget::Users => model.users.len(),
            PassTarget::TestUsers => model.test_users.len(),
            PassTarget::Items => model.items.len(),
            PassTarget::TestItems => model.test_items.len(),
        }
    }

    pub fn is_empty(self, model: &RatingsModel) -> bool {
        self.len(model) == 0
    }
}

/// A unit of three-phase work over an entity array.
///
/// `setup` and `teardown` get exclusive access to the pass and run strictly
/// before/after the per-element phase; `per_element` runs once per index,
/// possibly concurrently, and therefore takes `&self`.
pub trait ElementPass: Sync {
    fn setup(&mut self, _model: &RatingsModel) -> Result<()> {
        Ok(())
    }

    fn per_element(&self, model: &RatingsModel, index: usize) -> Result<()>;

    fn teardown(&mut self, _model: &RatingsModel) -> Result<()> {
        Ok(())
    }
}

/// Number of processors available to this process.
pub fn available_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Maps the CLI convention (`0` = auto-detect) to a concrete worker count.
pub fn resolve_workers(requested: usize) -> usize {
    if requested == 0 {
        available_workers()
    } else {
        requested
    }
}

/// Runs `pass` over the `target` array of `model` with `workers` workers.
///
/// Every index in `0..target.len(model)` is processed exactly once. A
/// failing element aborts the pass: the error names the element and
/// `teardown` does not run. Not reentrant per model instance; run passes
/// over one model sequentially.
pub fn run_pass(
    model: &RatingsModel,
    target: PassTarget,
    pass: &mut (impl ElementPass + ?Sized),
    workers: usize,
) -> Result<()> {
    if workers == 0 {
        return Err(CfError::InvalidArgument(
            "workers must be >= 1 (resolve 0 via resolve_workers)".into(),
        ));
    }
    let len = target.len(model);
    pass.setup(model)?;
    if workers == 1 || len <= 1 {
        run_elements_sequential(model, len, pass)?;
    } else {
        run_elements(model, len, pass, workers)?;
    }
    pass.teardown(model)
}

fn run_elements_sequential(
    model: &RatingsModel,
    len: usize,
    pass: &(impl ElementPass + ?Sized),
) -> Result<()> {
    for index in 0..len {
        pass.per_element(model, index)
            .map_err(|source| CfError::ElementFailed {
                index,
                source: Box::new(source),
            })?;
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn run_elements(
    model: &RatingsModel,
    len: usize,
    pass: &(impl ElementPass + ?Sized),
    workers: usize,
) -> Result<()> {
    use rayon::prelude::*;

    let chunk = (len / (8 * workers)).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CfError::WorkerPool(e.to_string()))?;
    pool.install(|| {
        (0..len)
            .into_par_iter()
            .with_min_len(chunk)
            .try_for_each(|index| {
                pass.per_element(model, index)
                    .map_err(|source| CfError::ElementFailed {
                        index,
                        source: Box::new(source),
                    })
            })
    })
}

#[cfg(not(feature = "parallel"))]
fn run_elements(
    model: &RatingsModel,
    len: usize,
    pass: &(impl ElementPass + ?Sized),
    _workers: usize,
) -> Result<()> {
    run_elements_sequential(model, len, pass)
}
