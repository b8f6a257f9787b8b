mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use chrono::NaiveDate;
use http_body_util::BodyExt;
use persq_core::feedback::{Catalog, FeedbackReport, ReportStatus};
use persq_core::ingest::Variable;
use persq_core::patterns::SqGroup;
use persq_service::{api, router, HealthResponse, Snapshot};
use serde_json::{json, Value};
use tower::ServiceExt;

const ORIGIN: &str = "http://localhost:5173";

fn app(snapshot: Snapshot) -> (Arc<Snapshot>, Router) {
    let snapshot = Arc::new(snapshot);
    let app = router(snapshot.clone(), &[ORIGIN.to_string()]);
    (snapshot, app)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let mut builder = Request::builder().method(method).uri(uri);
    if body.is_some() {
        builder = builder.header(header::CONTENT_TYPE, "application/json");
    }
    let request = builder
        .body(Body::from(body.unwrap_or("").to_string()))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

async fn post(app: &Router, uri: &str, body: &str) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

fn first_windowed_date(snapshot: &Snapshot, user: &str) -> NaiveDate {
    let engine = snapshot.engine().unwrap();
    let series = snapshot.user(user).unwrap();
    series
        .days()
        .iter()
        .map(|d| d.date)
        .find(|d| engine.report(series, *d).is_ok())
        .unwrap()
}

#[tokio::test]
async fn health_reports_versions() {
    let (snapshot, app) = app(common::cohort_snapshot());
    let (status, body) = get(&app, "/health").await;
    assert_eq!(status, StatusCode::OK);
    let health: HealthResponse = serde_json::from_value(body).unwrap();
    assert_eq!(health, api::health(&snapshot));
    assert_eq!(health.status, "ok");
    assert!(health.model_loaded && health.patterns_loaded);
    assert_eq!(health.versions.users, 3);
    assert_eq!(health.versions.model_kind.as_deref(), Some("linear"));
    assert_eq!(health.versions.patterns.as_ref().unwrap().len(), 64);
}

#[tokio::test]
async fn patterns_match_the_mined_sets() {
    let (snapshot, app) = app(common::cohort_snapshot());
    let sets = snapshot.patterns().unwrap();
    for group in SqGroup::ALL {
        let (status, body) = get(&app, &format!("/patterns?group={}", group.as_str())).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body, serde_json::to_value(sets.get(group)).unwrap());
    }
    let (status, body) = get(&app, "/patterns").await;
    assert_eq!(status, StatusCode::OK);
    let total: usize = SqGroup::ALL.iter().map(|g| sets.get(*g).len()).sum();
    assert_eq!(body.as_array().unwrap().len(), total);

    let (status, body) = get(&app, "/patterns?group=medium").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("medium"));
}

#[tokio::test]
async fn predict_and_feedback_equal_library_calls() {
    let (snapshot, app) = app(common::cohort_snapshot());
    let engine = snapshot.engine().unwrap();
    let user = "u01";
    let series = snapshot.user(user).unwrap();
    let first = first_windowed_date(&snapshot, user);
    for day in series.days().iter().filter(|d| d.date >= first).take(10) {
        let (status, body) = post(
            &app,
            "/predict",
            &json!({"user_id": user, "date": day.date}).to_string(),
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        let (sq, group) = engine.predict(series, day.date).unwrap();
        assert_eq!(body["predicted_sq"].as_f64().unwrap(), sq);
        assert_eq!(body["sq_group"], json!(group.as_str()));
        assert!((0.0..=100.0).contains(&sq));

        let (status, body) = get(&app, &format!("/feedback/{user}?date={}", day.date)).await;
        assert_eq!(status, StatusCode::OK);
        let expected = engine.report(series, day.date).unwrap();
        assert_eq!(body, serde_json::to_value(&expected).unwrap());
        let report: FeedbackReport = serde_json::from_value(body).unwrap();
        assert_eq!(report, expected);
    }
}

#[tokio::test]
async fn low_prediction_suggests_more_walking() {
    let (_, app) = app(common::step_snapshot());
    let (status, body) = get(&app, &format!("/feedback/u1?date={}", common::LOW_DAY)).await;
    assert_eq!(status, StatusCode::OK);
    let report: FeedbackReport = serde_json::from_value(body).unwrap();
    assert_eq!(report.predicted_sq, 75.0);
    assert_eq!(report.sq_group, SqGroup::Low);
    assert_eq!(report.status, ReportStatus::Feedback);
    let messages: Vec<&str> = report.items.iter().map(|i| i.message.as_str()).collect();
    assert_eq!(
        messages,
        vec!["Let's go out and have a walk", "Please try to walk more",]
    );
    assert!(report
        .items
        .iter()
        .all(|i| i.current_level == "low" && i.target_level == "normal"));
}

#[tokio::test]
async fn whatif_without_overrides_equals_feedback() {
    let (snapshot, app) = app(common::cohort_snapshot());
    let d = first_windowed_date(&snapshot, "u02");
    let (_, feedback) = get(&app, &format!("/feedback/u02?date={d}")).await;
    let (status, whatif) = post(
        &app,
        "/whatif",
        &json!({"user_id": "u02", "base_date": d}).to_string(),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(whatif, feedback);
    let (_, explicit) = post(
        &app,
        "/whatif",
        &json!({"user_id": "u02", "base_date": d, "overrides": {}}).to_string(),
    )
    .await;
    assert_eq!(explicit, feedback);
}

#[tokio::test]
async fn raising_steps_removes_the_step_suggestion() {
    let (snapshot, app) = app(common::step_snapshot());
    let request =
        json!({"user_id": "u1", "base_date": common::LOW_DAY, "overrides": {"steps": 7000}});
    let (status, body) = post(&app, "/whatif", &request.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    let report: FeedbackReport = serde_json::from_value(body).unwrap();
    let variables: Vec<&str> = report.items.iter().map(|i| i.parameter.as_str()).collect();
    assert_eq!(variables, vec!["distance"]);

    let engine = snapshot.engine().unwrap();
    let series = snapshot.user("u1").unwrap();
    let (mut days, prev) = engine.window_days(series, date(common::LOW_DAY)).unwrap();
    days.last_mut()
        .unwrap()
        .set(Variable::Steps, Some(7000.0))
        .unwrap();
    let expected = engine
        .report_for_days(series.profile(), &days, prev)
        .unwrap();
    assert_eq!(report, expected);

    let both = json!({"user_id": "u1", "base_date": common::LOW_DAY, "overrides": {"steps": 7000, "distance": 5.25}});
    let (_, body) = post(&app, "/whatif", &both.to_string()).await;
    let report: FeedbackReport = serde_json::from_value(body).unwrap();
    assert!(report.items.is_empty());
    assert_eq!(report.status, ReportStatus::FullyMatched);
}

#[tokio::test]
async fn whatif_leaves_the_snapshot_untouched() {
    let (snapshot, app) = app(common::step_snapshot());
    let uri = format!("/feedback/u1?date={}", common::LOW_DAY);
    let before_day = snapshot
        .user("u1")
        .unwrap()
        .day(date(common::LOW_DAY))
        .unwrap()
        .clone();
    let before_profile = snapshot.user("u1").unwrap().profile().clone();
    let (_, before) = get(&app, &uri).await;
    for overrides in [
        json!({"steps": 12000, "distance": 9.0}),
        json!({"mood": 5, "chronotype": "B"}),
        json!({"steps": 0}),
    ] {
        let request =
            json!({"user_id": "u1", "base_date": common::LOW_DAY, "overrides": overrides});
        let (status, _) = post(&app, "/whatif", &request.to_string()).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, after) = get(&app, &uri).await;
    assert_eq!(before, after);
    assert_eq!(
        snapshot
            .user("u1")
            .unwrap()
            .day(date(common::LOW_DAY))
            .unwrap(),
        &before_day
    );
    assert_eq!(snapshot.user("u1").unwrap().profile(), &before_profile);
}

#[tokio::test]
async fn chronotype_override_changes_the_profile_item() {
    let (_, app) = app(common::step_snapshot());
    let request =
        json!({"user_id": "u1", "base_date": common::LOW_DAY, "overrides": {"chronotype": "B"}});
    let (status, body) = post(&app, "/whatif", &request.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    let items: Vec<String> = body["audit"]["user_items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| {
            serde_json::from_value::<persq_core::patterns::Item>(v.clone())
                .unwrap()
                .to_string()
        })
        .collect();
    assert!(items.contains(&"AorB_B".to_string()), "{items:?}");
}

#[tokio::test]
async fn bad_requests_answer_400() {
    let (_, app) = app(common::step_snapshot());
    let whatif = |overrides: Value| {
        json!({"user_id": "u1", "base_date": common::LOW_DAY, "overrides": overrides}).to_string()
    };
    let cases = [
        ("/predict", "{not json".to_string()),
        ("/predict", json!({"user_id": "u1"}).to_string()),
        (
            "/predict",
            json!({"user_id": "u1", "date": "11/03/2020"}).to_string(),
        ),
        ("/whatif", whatif(json!({"age": 50}))),
        ("/whatif", whatif(json!({"gender": 1}))),
        ("/whatif", whatif(json!({"bogus": 1}))),
        ("/whatif", whatif(json!({"minutes_asleep": 400}))),
        ("/whatif", whatif(json!({"mood": 9}))),
        ("/whatif", whatif(json!({"steps": "many"}))),
        ("/whatif", whatif(json!({"steps": -5}))),
        ("/whatif", whatif(json!({"chronotype": "C"}))),
    ];
    for (uri, body) in cases {
        let (status, reply) = post(&app, uri, &body).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri} {body}: {reply}");
        assert!(!reply["error"].as_str().unwrap().is_empty());
    }
    for uri in ["/feedback/u1", "/feedback/u1?date=yesterday"] {
        let (status, _) = get(&app, uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
    }
}

#[tokio::test]
async fn unknown_users_and_dates_answer_404() {
    let (_, app) = app(common::step_snapshot());
    let (status, body) = get(&app, &format!("/feedback/nobody?date={}", common::LOW_DAY)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].as_str().unwrap().contains("nobody"));
    let (status, _) = get(&app, "/feedback/u1?date=2021-01-01").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = post(
        &app,
        "/predict",
        &json!({"user_id": "u1", "date": "2019-01-01"}).to_string(),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = post(
        &app,
        "/whatif",
        &json!({"user_id": "x", "base_date": common::LOW_DAY}).to_string(),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn missing_model_answers_409() {
    let dataset = common::step_dataset();
    let thresholds = common::step_thresholds(&dataset);
    let (_, app) = app(Snapshot::new(
        dataset,
        thresholds,
        None,
        Catalog::default(),
        None,
    ));
    let (status, body) = get(&app, "/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "degraded");
    assert_eq!(body["model_loaded"], false);
    let (status, _) = post(
        &app,
        "/predict",
        &json!({"user_id": "u1", "date": common::LOW_DAY}).to_string(),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = get(&app, &format!("/feedback/u1?date={}", common::LOW_DAY)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = get(&app, "/patterns").await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn cors_allows_the_configured_origin() {
    let (_, app) = app(common::step_snapshot());
    let preflight = Request::builder()
        .method(Method::OPTIONS)
        .uri("/whatif")
        .header(header::ORIGIN, ORIGIN)
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .header(header::ACCESS_CONTROL_REQUEST_HEADERS, "content-type")
        .body(Body::empty())
        .unwrap();
    let response = app.clone().oneshot(preflight).await.unwrap();
    assert!(response.status().is_success());
    assert_eq!(
        response.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN],
        ORIGIN
    );

    let other = Request::builder()
        .uri("/health")
        .header(header::ORIGIN, "http://evil.example")
        .body(Body::empty())
        .unwrap();
    let response = app.clone().oneshot(other).await.unwrap();
    assert!(response
        .headers()
        .get(header::ACCESS_CONTROL_ALLOW_ORIGIN)
        .is_none());
}

#[tokio::test]
async fn repeated_requests_are_identical() {
    let (_, app) = app(common::step_snapshot());
    let uri = format!("/feedback/u2?date={}", common::LOW_DAY);
    let (_, a) = get(&app, &uri).await;
    let (_, b) = get(&app, &uri).await;
    assert_eq!(a, b);
}
