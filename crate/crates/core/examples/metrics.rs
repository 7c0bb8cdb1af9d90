//! ROUGE-1, Flesch Reading Ease, the random-word control and stage similarity.
use litreview::evaluation::{
    f1_score, fres, random_baseline_document, rouge1, stage_similarity_report, StageTexts,
};
use litreview::search::{embed_texts, StubEmbedder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = "Saliency maps highlight the pixels that drive an image classifier's decision.";
    let candidate = "Saliency maps highlight pixels that drive a decision.";
    let r = rouge1(candidate, reference);
    println!("ROUGE-1 P={:.3} R={:.3} F1={:.3}", r.precision, r.recall, r.f1);
    println!("F1(0.963, 0.405) = {:.3}", f1_score(0.963, 0.405));

    for text in ["The cat sat on the mat.", reference] {
        let s = fres(text)?;
        println!("FRES {:7.2}  {}  <- {text:?}", s.fres, s.band);
    }

    let topic = "Explainable Artificial Intelligence, interpretable machine learning";
    let topic_vec = embed_texts(&[topic.to_string()], &StubEmbedder)?.remove(0);
    let texts = StageTexts {
        abs: Some("Interpretable machine learning explains model decisions with saliency and Shapley values.".into()),
        t5sum: Some("Saliency explains decisions.".into()),
        gpt_sec: Some("Explainable artificial intelligence methods include saliency maps.".into()),
        gpt_slr: Some("This review surveys explainable artificial intelligence.".into()),
    };
    for (label, v) in stage_similarity_report(&topic_vec, &texts, &StubEmbedder, 7, 500)?.rows() {
        println!("{label:<7} {v:.3}");
    }
    let words: Vec<String> = random_baseline_document(7, 12).split(' ').map(String::from).collect();
    println!("random control starts: {}", words.join(" "));
    Ok(())
}
