//! BASELINE: rebuild every projection from the sorted lists, then run the
//! list-backed skyline pass.

use crate::error::Result;
use crate::index::SortedIndex;
use crate::model::{ProjectedTuple, Query, Relation, Scorer};

use super::st_s::list_skyline;
use super::{check_index, ProgressiveSink, SkylineResult};

/// `n` sorted accesses on the first query attribute's list, plus one random
/// access per remaining query attribute and tuple.
pub fn baseline_project_skyline(
    relation: &Relation,
    index: &SortedIndex,
    query: &Query,
    sink: &mut dyn ProgressiveSink,
) -> Result<SkylineResult> {
    check_index(relation, index)?;
    let scorer = Scorer::for_query(relation, query)?;
    let attrs = query.attrs();
    let mut cursor = index.cursor();
    let mut tuples = Vec::with_capacity(relation.tuple_count());
    while let Some((id, v)) = cursor.sorted_access(attrs[0]) {
        let mut values = Vec::with_capacity(attrs.len());
        values.push(v);
        for &a in &attrs[1..] {
            values.push(cursor.random_access(a, id)?);
        }
        tuples.push(ProjectedTuple { id, values });
    }
    let mut result = list_skyline(tuples, &scorer, sink);
    let counters = cursor.counters();
    result.metrics.sorted_accesses = counters.sorted_accesses;
    result.metrics.random_accesses = counters.random_accesses;
    Ok(result)
}
