import type { WorkerSession } from "./session.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function prettify(id: string): string {
  return id.replace(/_/g, " ");
}

/** Question heading, e.g. "Which of the following are big Citys?" */
export function questionText(property: string, type: string): string {
  return `Which of the following are ${property} ${type}s?`;
}

/**
 * Render the session as an HTML fragment.  Pure string construction so the
 * card count and checklist contents are testable without a DOM.
 */
export function renderSession(session: WorkerSession): string {
  switch (session.state) {
    case "idle":
    case "loading":
      return `<p class="status">Loading task…</p>`;
    case "complete":
      return `<div class="done"><h2>All tasks answered</h2>
        <p>You completed ${session.answered} task${session.answered === 1 ? "" : "s"}. Thank you!</p></div>`;
    case "error":
      return `<div class="banner error"><p>${escapeHtml(session.lastError ?? "request failed")}</p>
        <button id="retry">Retry</button></div>`;
    case "question":
      break;
  }
  const hit = session.hit!;
  const cards = hit.instances
    .map((inst) => {
      const checked = session.selectedInstances.has(inst.id) ? " checked" : "";
      const props = Object.entries(inst.display_properties)
        .map(
          ([k, v]) =>
            `<li><span class="prop-name">${escapeHtml(k)}</span>: ${escapeHtml(v)}</li>`,
        )
        .join("");
      return `<label class="instance-card">
        <input type="checkbox" data-instance="${escapeHtml(inst.id)}"${checked}>
        <span class="instance-name">${escapeHtml(prettify(inst.id))}</span>
        <ul class="instance-props">${props}</ul>
      </label>`;
    })
    .join("\n");
  const checklist = hit.candidate_properties
    .map((name) => {
      const checked = session.selectedProperties.has(name) ? " checked" : "";
      return `<label class="property-item">
        <input type="checkbox" data-property="${escapeHtml(name)}"${checked}>
        ${escapeHtml(name)}
      </label>`;
    })
    .join("\n");
  return `<div class="hit" data-hit-id="${escapeHtml(hit.id)}">
    <h2>${escapeHtml(questionText(hit.property, hit.type))}</h2>
    <div class="instances">${cards}</div>
    <h3>Which properties affected your decision?</h3>
    <div class="properties">${checklist}</div>
    <button id="submit">Submit and continue</button>
    <p class="status">answered so far: ${session.answered}</p>
  </div>`;
}
