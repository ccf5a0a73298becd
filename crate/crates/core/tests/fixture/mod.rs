//! Corpus fixtures shared by the acceptance suite.

use qspace_core::annotate::{EntityType, GazetteerEntry};
use qspace_core::config::PipelineConfig;
use qspace_core::corpus::{build_corpus, Document};
use qspace_core::pipeline::Pipeline;

fn entry(surface: &str, id: &str, name: &str, et: EntityType) -> GazetteerEntry {
    GazetteerEntry {
        surface: surface.into(),
        canonical_id: id.into(),
        canonical_name: name.into(),
        entity_type: et,
        score: 0.9,
    }
}

fn doc(id: &str, body: &str) -> Document {
    Document {
        doc_id: id.into(),
        title: None,
        body: body.into(),
    }
}

/// The rescue fixture: a distractor passage that is lexically closest to
/// the query but contains the wrong team, while the true answer's
/// question set carries the query vocabulary.
pub fn rescue_pipeline() -> Pipeline {
    let gazetteer = vec![
        entry("chicago bears", "E1", "Chicago Bears", EntityType::PersonOrg),
        entry(
            "new england patriots",
            "E2",
            "New England Patriots",
            EntityType::PersonOrg,
        ),
        entry("new orleans", "E3", "New Orleans", EntityType::Location),
        entry("walter payton", "E4", "Walter Payton", EntityType::PersonOrg),
    ];

    let docs = vec![
        // The distractor repeats the query terms heavily; its only entity
        // mention sits in a bland sentence.
        doc(
            "distractor",
            "Many fans debated who won Super Bowl XX for years afterwards. \
             Everyone kept asking who won Super Bowl XX that whole winter. \
             New England Patriots lost badly in that contest.",
        ),
        doc("b1", "Chicago Bears won the championship of Super Bowl XX at last."),
        doc("b2", "Chicago Bears defeated the Patriots in the title game of Super Bowl XX."),
        doc("b3", "Chicago Bears claimed victory in Super Bowl XX before a record crowd."),
        doc("b4", "Chicago Bears dominated Super Bowl XX from the opening drive onward."),
        doc("b5", "Chicago Bears took the trophy of Super Bowl XX back home in triumph."),
        doc("b6", "Chicago Bears crushed their rival during Super Bowl XX that evening."),
        doc("b7", "Chicago Bears made Super Bowl XX look effortless for sixty minutes."),
        doc("b8", "Chicago Bears sealed Super Bowl XX with a late defensive stand."),
        doc("b9", "Chicago Bears entered Super Bowl XX as favorites and delivered fully."),
        doc("b10", "Chicago Bears celebrated Super Bowl XX with a parade downtown."),
        doc("b11", "Chicago Bears finished Super Bowl XX with a shutout second half."),
        doc("b12", "Chicago Bears treated Super Bowl XX as their grand stage that night."),
        doc("n1", "The big game was held in New Orleans before a huge travelling crowd."),
        doc("n2", "Thousands of supporters travelled to New Orleans for the festivities."),
        doc("n3", "Hotels in New Orleans filled quickly during the week of the matchup."),
        doc("w1", "Walter Payton carried the offense through the entire season with grace."),
        doc("w2", "Teammates praised Walter Payton for his leadership all year long."),
    ];

    Pipeline::build_in_memory(
        build_corpus(docs, 50),
        gazetteer,
        PipelineConfig::default(),
    )
    .expect("rescue fixture builds")
}

/// A corpus of `n_entities` entities with `n_occurrences` occurrences
/// each, where every entity carries its own vocabulary so its questions
/// cluster under the embedding retriever.
pub fn clustered_pipeline(n_entities: usize, n_occurrences: usize) -> Pipeline {
    const VERBS: [&str; 6] = [
        "discovered", "guarded", "polished", "carried", "studied", "treasured",
    ];
    const PLACES: [&str; 6] = ["cavern", "ridge", "harbor", "temple", "valley", "market"];
    assert!(n_occurrences <= VERBS.len());

    let mut gazetteer = Vec::new();
    let mut docs = Vec::new();
    for i in 0..n_entities {
        let name = format!("Keeper{i:02} Guild");
        let et = EntityType::ALL[i % 3];
        gazetteer.push(entry(&name.to_lowercase(), &format!("E{i:02}"), &name, et));
        for j in 0..n_occurrences {
            docs.push(doc(
                &format!("e{i:02}_o{j}"),
                &format!(
                    "{name} {} the zor{i:02} crystal in the vex{i:02} {}.",
                    VERBS[j], PLACES[j]
                ),
            ));
        }
    }

    Pipeline::build_in_memory(
        build_corpus(docs, 50),
        gazetteer,
        PipelineConfig::default(),
    )
    .expect("clustered fixture builds")
}
