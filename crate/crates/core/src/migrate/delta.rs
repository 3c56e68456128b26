use super::expect_schema;
use crate::error::{Error, Result};
use crate::instance::{Datum, Instance, InstanceBuilder, RowId};
use crate::kernel::{AttrImage, Mapping};
use crate::value::Value;

/// `delta_F(I) = I . F`: each source node reads the rows of its image, edges
/// and attributes evaluate their image paths.
pub fn delta(f: &Mapping, i: &Instance) -> Result<Instance> {
    expect_schema(f.target(), i)?;
    let s = f.source().clone();
    let mut b = InstanceBuilder::from(Instance::empty(s.clone()));
    for node in s.nodes() {
        for r in i.rows(f.node_image(node)?) {
            b.add_row(node, r)?;
        }
    }
    for e in s.edges() {
        let img = f.edge_image(&e.source, &e.name)?;
        for (r, d) in i.eval_path_column(img)? {
            match d {
                Datum::Row(y) => b.set_edge(&e.source, &e.name, r, y)?,
                Datum::Value(_) => return Err(Error::Internal(format!("edge image `{img}` is attribute-valued"))),
            }
        }
    }
    for a in s.attributes() {
        let img = f.attribute_image(&a.source, &a.name)?;
        let column: Vec<(RowId, Value)> = match img {
            AttrImage::Const(v) => i.rows(f.node_image(&a.source)?).map(|r| (r, v.clone())).collect(),
            AttrImage::Path(p) => i
                .eval_path_column(p)?
                .into_iter()
                .map(|(r, d)| match d {
                    Datum::Value(v) => Ok((r, v)),
                    Datum::Row(_) => Err(Error::Internal(format!("attribute image `{p}` is node-valued"))),
                })
                .collect::<Result<_>>()?,
        };
        for (r, v) in column {
            b.set_attr(&a.source, &a.name, r, v)?;
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::instance::tests::{chain, parent_schema};
    use crate::instance::{iso_check, RowId};
    use crate::kernel::{BaseType, Path, Schema};
    use crate::value::Value;

    fn relation_schema() -> Arc<Schema> {
        Arc::new(
            Schema::builder("T")
                .node("is-a")
                .node("Material")
                .edge("left", "is-a", "Material")
                .edge("right", "is-a", "Material")
                .attribute("name", "Material", BaseType::String)
                .build()
                .unwrap(),
        )
    }

    fn fn_mapping(n: usize) -> Mapping {
        Mapping::builder(format!("F{n}"), relation_schema(), parent_schema())
            .node("is-a", "Material")
            .node("Material", "Material")
            .edge("is-a", "left", Path::id("Material"))
            .edge("is-a", "right", Path::edges("Material", vec!["parent"; n]))
            .attribute_dotted("Material", "name", "Material.name")
            .unwrap()
            .build()
            .unwrap()
    }

    fn pairs(r: &Instance) -> Vec<(String, String)> {
        let name = |m: RowId| match r.attr("Material", "name", m).unwrap() {
            Value::Str(s) => s.clone(),
            v => v.to_string(),
        };
        let mut out: Vec<_> = r
            .rows("is-a")
            .map(|x| (name(r.edge("is-a", "left", x).unwrap()), name(r.edge("is-a", "right", x).unwrap())))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn identity_delta_is_identity() {
        let i = chain();
        let d = delta(&Mapping::identity(i.schema().clone()), &i).unwrap();
        assert_eq!(d, i);
    }

    #[test]
    fn f0_gives_the_diagonal() {
        let d = delta(&fn_mapping(0), &chain()).unwrap();
        d.validate().unwrap();
        assert_eq!(
            pairs(&d),
            [("iron", "iron"), ("matter", "matter"), ("metal", "metal")]
                .map(|(a, b)| (a.to_owned(), b.to_owned()))
        );
    }

    #[test]
    fn f1_reads_the_graph_of_parent() {
        let d = delta(&fn_mapping(1), &chain()).unwrap();
        d.validate().unwrap();
        assert_eq!(
            pairs(&d),
            [("iron", "metal"), ("matter", "matter"), ("metal", "matter")]
                .map(|(a, b)| (a.to_owned(), b.to_owned()))
        );
    }

    #[test]
    fn delta_is_functorial_on_f1_then_double() {
        let s = parent_schema();
        let double = Mapping::builder("double", s.clone(), s.clone())
            .node("Material", "Material")
            .edge("Material", "parent", Path::edges("Material", ["parent", "parent"]))
            .attribute_dotted("Material", "name", "Material.name")
            .unwrap()
            .build()
            .unwrap();
        let f = fn_mapping(1);
        let composite = f.then(&double).unwrap();
        let i = chain();
        let lhs = delta(&composite, &i).unwrap();
        let rhs = delta(&f, &delta(&double, &i).unwrap()).unwrap();
        assert!(iso_check(&lhs, &rhs));
    }
}
