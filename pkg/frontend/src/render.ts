/** Pure HTML-string renderers; all displayed numbers come from service
 * response fields via the string formatters, never from client-side math. */

import type { Bar } from "./chart.js";
import { formatEuro, formatPercent } from "./format.js";
import type { FormField } from "./form.js";
import type { ScenarioDelta } from "./scenario.js";
import { centsToEuroString } from "./scenario.js";
import type { FieldError, PredictResponse } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function inputFor(field: FormField, value: string | boolean | undefined): string {
  const id = `f-${escapeHtml(field.name)}`;
  if (field.control === "select") {
    const blank = field.allowMissing ? `<option value=""></option>` : "";
    const options = field.options
      .map((lvl) => {
        const sel = value === lvl ? " selected" : "";
        return `<option value="${escapeHtml(lvl)}"${sel}>${escapeHtml(lvl)}</option>`;
      })
      .join("");
    return `<select id="${id}" name="${escapeHtml(field.name)}">${blank}${options}</select>`;
  }
  if (field.control === "toggle") {
    const checked = value === true || value === "true" ? " checked" : "";
    return `<input id="${id}" name="${escapeHtml(field.name)}" type="checkbox"${checked}>`;
  }
  const step = field.control === "integer" ? ` step="1" min="0"` : "";
  const val = typeof value === "string" ? ` value="${escapeHtml(value)}"` : "";
  return `<input id="${id}" name="${escapeHtml(field.name)}" type="number"${step}${val}>`;
}

export function renderForm(
  fields: FormField[],
  raw: Record<string, string | boolean | undefined> = {},
  errors: FieldError[] = [],
): string {
  const errorFor = new Map(errors.map((e) => [e.field, e.message]));
  const rows = fields.map((field) => {
    const badge = field.extraLegal
      ? `<span class="badge extra-legal" title="extra-legal factor">extra-legal</span>`
      : "";
    const unit = field.unit && field.unit !== "unitless"
      ? `<span class="unit">${escapeHtml(field.unit)}</span>`
      : "";
    const error = errorFor.has(field.name)
      ? `<span class="field-error">${escapeHtml(errorFor.get(field.name)!)}</span>`
      : "";
    return (
      `<div class="field" data-field="${escapeHtml(field.name)}">` +
      `<label for="f-${escapeHtml(field.name)}">${escapeHtml(field.name)}${badge}</label>` +
      `${inputFor(field, raw[field.name])}${unit}${error}</div>`
    );
  });
  return rows.join("\n");
}

export function renderResult(result: PredictResponse | null, pending: boolean): string {
  if (pending) return `<p class="pending">predicting&hellip;</p>`;
  if (!result) return `<p class="placeholder">no prediction yet</p>`;
  const probability = formatPercent(result.grant_probability);
  const adjusted = formatEuro(result.amount_adjusted);
  const raw = formatEuro(result.amount_raw);
  const explanation =
    result.grant_label === 0
      ? `<p class="explain">alimony not granted: the grant classifier predicts ` +
        `no allowance, so the adjusted amount is zero</p>`
      : "";
  const warnings = result.warnings.length
    ? `<ul class="warnings">${result.warnings
        .map((w) => `<li>${escapeHtml(w)}</li>`)
        .join("")}</ul>`
    : "";
  return (
    `<dl class="result">` +
    `<dt>grant probability</dt><dd class="prob">${probability}</dd>` +
    `<dt>adjusted amount</dt><dd class="amount">${adjusted}</dd>` +
    `<dt>decomposition</dt><dd class="decomposition">` +
    `${result.grant_label} (grant) &times; ${raw} (amount)</dd>` +
    `</dl>${explanation}${warnings}`
  );
}

export function renderDelta(delta: ScenarioDelta | null): string {
  if (!delta) return `<p class="placeholder">submit both scenarios to compare</p>`;
  const sign = delta.amountDeltaCents > 0n ? "+" : "";
  const amount = `${sign}${formatEuro(centsToEuroString(delta.amountDeltaCents))}`;
  const prob = `${delta.probabilityDelta >= 0 ? "+" : ""}` +
    `${(delta.probabilityDelta * 100).toFixed(1)}pp`;
  const changed = delta.changedFeatures.length
    ? delta.changedFeatures.map(escapeHtml).join(", ")
    : "nothing";
  return (
    `<div class="delta">` +
    `<p>${escapeHtml(delta.rightId)} vs ${escapeHtml(delta.leftId)}: ` +
    `<span class="amount-delta">${amount}</span> ` +
    `(<span class="prob-delta">${prob}</span> grant probability)</p>` +
    `<p class="changed">changed: ${changed}</p></div>`
  );
}

export function renderChart(bars: Bar[]): string {
  if (!bars.length) return `<p class="placeholder">no importances available</p>`;
  const rows = bars
    .map((bar) => {
      const cls = bar.highlighted ? "bar extra-legal" : "bar";
      return (
        `<div class="chart-row" data-feature="${escapeHtml(bar.feature)}">` +
        `<span class="chart-label">${escapeHtml(bar.feature)}</span>` +
        `<span class="${cls}" style="width:${bar.widthPct}%"></span>` +
        `<span class="chart-score">${bar.score.toPrecision(3)}</span></div>`
      );
    })
    .join("\n");
  return rows;
}

export function renderError(message: string): string {
  return `<div class="banner error">${escapeHtml(message)}</div>`;
}
