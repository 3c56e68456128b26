use std::collections::BTreeSet;

use catql::enrich::*;
use catql::instance::iso_check;
use catql::query::{parse_query, RunConfig};
use catql::sql::{import_sql, ImportOptions};
use catql::{Instance, Path, Value};

fn pairs(r: &Instance) -> BTreeSet<(String, String)> {
    relation_pairs(r)
        .unwrap()
        .into_iter()
        .map(|(a, b)| (catql::render::cell(&a), catql::render::cell(&b)))
        .collect()
}

fn set(items: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    items.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn fn_family_shapes() {
    let s = parent_schema();
    let f0 = build_fn(0, &s).unwrap();
    assert!(f0.edge_image("is-a", "right").unwrap().is_identity());
    assert!(f0.edge_image("is-a", "left").unwrap().is_identity());
    assert_eq!(build_fn(1, &s).unwrap().edge_image("is-a", "right").unwrap(), &Path::edges("Material", ["parent"]));
    assert_eq!(build_fn(3, &s).unwrap().edge_image("is-a", "right").unwrap().to_string(), "Material.parent.parent.parent");
}

#[test]
fn closure_of_chain() {
    let p = function_from_pairs(&[("iron", "metal"), ("metal", "matter")]).unwrap();
    assert_eq!(
        pairs(&transitive_closure(&p, 3).unwrap()),
        set(&[
            ("iron", "iron"),
            ("iron", "metal"),
            ("iron", "matter"),
            ("metal", "metal"),
            ("metal", "matter"),
            ("matter", "matter")
        ])
    );
    assert_eq!(pairs(&transitive_closure(&p, 0).unwrap()).len(), 3);
}

#[test]
fn op_and_compose() {
    let r = relation_from_pairs(&[("a", "b")]);
    assert_eq!(pairs(&op_relation(&r).unwrap()), set(&[("b", "a")]));
    assert!(iso_check(&op_relation(&op_relation(&r).unwrap()).unwrap(), &r));
    let s = relation_from_pairs(&[("b", "c")]);
    assert_eq!(pairs(&compose_relations(&r, &s).unwrap()), set(&[("a", "c")]));
    let diag = relation_from_pairs(&[("b", "b")]);
    assert_eq!(pairs(&compose_relations(&r, &diag).unwrap()), pairs(&r));
}

#[test]
fn translation_through_synonyms() {
    let isa = transitive_closure(&function_from_pairs(&[("cast_iron", "ferrous"), ("ferrous", "metal")]).unwrap(), 3).unwrap();
    let syn = relation_from_pairs(&[("ferrous", "iron"), ("cast_iron", "Cast Iron")]);
    let t = translate_isa(&isa, &syn, 3).unwrap();
    assert_eq!(
        pairs(&t),
        set(&[("Cast Iron", "Cast Iron"), ("Cast Iron", "iron"), ("iron", "iron")])
    );
    let empty = relation_from_pairs::<&str>(&[]);
    assert_eq!(translate_isa(&isa, &empty, 3).unwrap().total_rows(), 0);
}

const MINI: &str = "
create table material (id int primary key, mname varchar(50), grade int);
create table cap (id int primary key, cname varchar(20));
create table link (id int primary key, c int references cap, m int references material);
insert into material values (1, 'A', 5), (2, 'B', 6);
insert into cap values (1, 'drill');
insert into link values (1, 1, 1);
";

#[test]
fn generated_script_shapes() {
    let (s, _) = import_sql(MINI, &ImportOptions::default()).unwrap();
    let text = generate_enrichment(&s, "material", "mname").unwrap();
    assert_eq!(text.matches("retarget").count(), 1);
    assert!(text.contains("let enriched = union portal new_link;"), "{text}");
    let text = generate_enrichment(&s, "cap", "cname").unwrap();
    assert!(text.contains("union portal new_link;"));
    assert!(generate_enrichment(&s, "material", "grade").is_err());
    let (s, _) = import_sql("create table t (id int primary key, n varchar(3));", &ImportOptions::default()).unwrap();
    assert!(generate_enrichment(&s, "t", "n").unwrap().contains("let enriched = union portal;"));
}

#[test]
fn one_link_one_pair() {
    let (_, portal) = import_sql(MINI, &ImportOptions::default()).unwrap();
    let isa = relation_from_pairs(&[("A", "B")]);
    let out = enrich(&portal, &isa, "material", "mname", &RunConfig::default()).unwrap();
    let expected_sql = format!("{MINI} insert into link values (2, 1, 2);");
    let (_, expected) = import_sql(&expected_sql, &ImportOptions::default()).unwrap();
    assert!(iso_check(&out.instance, &expected));

    let empty = relation_from_pairs::<&str>(&[]);
    let same = enrich(&portal, &empty, "material", "mname", &RunConfig::default()).unwrap();
    assert!(iso_check(&same.instance, &catql::instance::relationalize(&portal)));
}

#[test]
fn missing_targets_are_created() {
    let (_, portal) = import_sql(MINI, &ImportOptions::default()).unwrap();
    let isa = relation_from_pairs(&[("A", "Z")]);
    let out = enrich(&portal, &isa, "material", "mname", &RunConfig::default()).unwrap();
    let i = &out.instance;
    assert_eq!(i.row_count("material"), 3);
    assert_eq!(i.row_count("link"), 2);
    let q = parse_query("select m.grade as g from link as l, material as m where l.m = m and m.mname = 'Z'").unwrap();
    let r = catql::query::eval_query_direct(&q, i).unwrap();
    assert_eq!(r.attribute_values("row", "g"), [Value::Int(5)].into());
    assert!(out.notes.iter().any(|n| n.contains("created")));
}
