use super::space::FeSpace;
use super::sparse::CsrMatrix;
use crate::elasticity::ElasticParams;
use crate::par;

/// Global stiffness matrix. Element matrices are computed in parallel and
/// scattered in cell order, so the result does not depend on thread count.
pub fn assemble_stiffness(space: &FeSpace, params: &ElasticParams) -> CsrMatrix {
    let nloc = space.order.nodes_per_cell();
    let nd = 2 * nloc;
    let locals = par::map_range(space.n_cells(), |c| space.element_stiffness(params, c));
    let mut trip = Vec::with_capacity(locals.len() * nd * nd);
    for (c, k) in locals.iter().enumerate() {
        let nodes = space.cell(c);
        let dof = |i: usize| 2 * nodes[i / 2] + i % 2;
        for i in 0..nd {
            for j in 0..nd {
                trip.push((dof(i), dof(j), k[i * nd + j]));
            }
        }
    }
    CsrMatrix::from_triplets(space.n_dofs(), &trip)
}
