/** DOM rendering for the review console; framework-free, returns plain nodes. */

import type { ClaimCard, RankedRow, SentenceEvidence } from "./api.js";
import { statusOf, TriageState, TriageStatus } from "./state.js";

const STATUS_LABELS: Record<TriageStatus, string> = {
  unreviewed: "unreviewed",
  "accepted-for-checking": "accepted for checking",
  dismissed: "dismissed",
};

export function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** CSS class for a fact-check label, e.g. "truth truth-half-true". */
export function truthClass(truthValue: string): string {
  return `truth truth-${truthValue.replace(/[^a-z-]/g, "")}`;
}

export function renderClaimCard(doc: Document, claim: ClaimCard): HTMLElement {
  const card = el(doc, "article", "claim-card");
  card.dataset.claimId = claim.claim_id;

  const head = el(doc, "header", "claim-head");
  head.append(el(doc, "span", truthClass(claim.truth_value), claim.truth_value));
  if (claim.truth_value === "half-true") {
    card.classList.add("half-true-claim");
    head.append(el(doc, "span", "half-true-flag", "⚠ mixed evidence"));
  }
  if (claim.title) head.append(el(doc, "span", "claim-title", claim.title));
  if (claim.date) head.append(el(doc, "time", "claim-date", claim.date));
  card.append(head);

  card.append(el(doc, "p", "claim-statement", claim.statement));
  if (claim.verdict !== null) {
    card.append(el(doc, "p", "claim-verdict", `gold verdict: ${claim.verdict}`));
  }

  const details = el(doc, "details", "claim-scores");
  details.append(el(doc, "summary", undefined, "feature scores"));
  const dl = el(doc, "dl", "scores");
  for (const [name, value] of Object.entries(claim.scores)) {
    dl.append(el(doc, "dt", undefined, name));
    dl.append(el(doc, "dd", undefined, value.toFixed(4)));
  }
  details.append(dl);
  card.append(details);
  return card;
}

export interface RankingHandlers {
  onSelect(row: RankedRow): void;
  onStatus(row: RankedRow): void;
}

/** Ranked sentences in exactly the order the API returned them. */
export function renderRankingList(
  doc: Document,
  rows: RankedRow[],
  state: TriageState,
  handlers: RankingHandlers,
): HTMLElement {
  const list = el(doc, "ol", "ranking");
  for (const row of rows) {
    const item = el(doc, "li", "ranked-row");
    item.dataset.sentenceId = row.sentence_id;
    const status = statusOf(state, row.sentence_id);
    item.classList.add(`status-${status}`);

    item.append(el(doc, "span", "rank", `#${row.rank}`));

    const text = el(doc, "button", "sentence-text", row.text);
    text.type = "button";
    text.addEventListener("click", () => handlers.onSelect(row));
    item.append(text);

    const meta = el(doc, "span", "meta");
    meta.append(el(doc, "span", "score", row.score.toFixed(3)));
    if (row.speaker) meta.append(el(doc, "span", "speaker", row.speaker));
    if (row.relevant !== null) {
      meta.append(
        el(
          doc,
          "span",
          row.relevant ? "badge relevant" : "badge not-relevant",
          row.relevant ? "verifiable" : "not verifiable",
        ),
      );
    }
    const n = row.evidence.length;
    meta.append(el(doc, "span", "badge evidence-count", `${n} candidate${n === 1 ? "" : "s"}`));
    item.append(meta);

    const toggle = el(doc, "button", "status-toggle", STATUS_LABELS[status]);
    toggle.type = "button";
    toggle.addEventListener("click", () => handlers.onStatus(row));
    item.append(toggle);

    list.append(item);
  }
  return list;
}

/** Evidence panel for one sentence, with the r (candidates) control. */
export function renderEvidencePanel(
  doc: Document,
  payload: SentenceEvidence,
  r: number,
  onR: (r: number) => void,
): HTMLElement {
  const panel = el(doc, "section", "evidence-panel");
  panel.append(el(doc, "h2", "panel-title", payload.sentence_id));
  panel.append(el(doc, "blockquote", "panel-sentence", payload.text));

  const control = el(doc, "label", "r-control", "candidates ");
  const input = doc.createElement("input");
  input.type = "number";
  input.min = "1";
  input.value = String(r);
  input.className = "r-input";
  input.addEventListener("change", () => {
    const next = Number(input.value);
    if (Number.isInteger(next) && next >= 1) onR(next);
  });
  control.append(input);
  panel.append(control);

  if (payload.evidence.length === 0) {
    panel.append(el(doc, "p", "no-candidates", "no candidate claims found"));
  } else {
    const cards = el(doc, "div", "claim-cards");
    for (const claim of payload.evidence) cards.append(renderClaimCard(doc, claim));
    panel.append(cards);
  }
  return panel;
}

export function renderErrorBanner(
  doc: Document,
  message: string,
  onRetry: () => void,
): HTMLElement {
  const banner = el(doc, "div", "error-banner");
  banner.setAttribute("role", "alert");
  banner.append(el(doc, "span", "error-message", message));
  const retry = el(doc, "button", "retry", "retry");
  retry.type = "button";
  retry.addEventListener("click", onRetry);
  banner.append(retry);
  return banner;
}
