//! Random CRUD forests for property tests, sweeps and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::pim::{ClassDecl, ModelBuilder, Operation, Stereotype, UmlModel};

/// A forest of `1..=max_classes` classes, each with the four CRUD
/// operations. Class names, declaration order, parent links and operation
/// order are all randomized; class 0 of the generated tree is always a
/// root, later classes pick a root or an earlier class as parent.
pub fn random_crud_forest<R: Rng + ?Sized>(rng: &mut R, max_classes: usize) -> UmlModel {
    let n = rng.gen_range(1..=max_classes.max(1));
    let mut names: Vec<String> = (0..n).map(|i| format!("K{i:02}")).collect();
    names.shuffle(rng);

    let mut decls: Vec<ClassDecl> = Vec::with_capacity(n);
    for i in 0..n {
        let mut decl = ClassDecl::new(names[i].clone());
        if i > 0 && rng.gen_bool(0.7) {
            decl = decl.parent(names[rng.gen_range(0..i)].clone());
        }
        let mut ops = Stereotype::ALL;
        ops.shuffle(rng);
        for st in ops {
            decl = decl.op(Operation::crud(st));
        }
        decls.push(decl);
    }
    decls.shuffle(rng);

    let mut builder = ModelBuilder::new("forest");
    for decl in decls {
        builder.push(decl);
    }
    builder
        .build()
        .expect("parents are drawn from declared classes")
}

/// A single chain `C0 <- C1 <- ... <- C{n-1}` with full CRUD.
pub fn crud_chain_of(n: usize) -> UmlModel {
    let names: Vec<String> = (0..n).map(|i| format!("C{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    crate::pim::crud_chain("chain", &refs)
}
