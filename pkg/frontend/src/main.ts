/** DOM bootstrap: fetch the schema, render the scenario form, wire events.
 * All prediction math happens server-side; this file only moves strings. */

import { ApiClient, ApiError, resolveBaseUrl } from "./api.js";
import { importanceBars } from "./chart.js";
import { buildFormFields, collectValues, type FormField, type RawInputs } from "./form.js";
import { renderChart, renderDelta, renderError, renderForm, renderResult } from "./render.js";
import { ScenarioStore, scenarioDelta } from "./scenario.js";
import type { FieldError } from "./types.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function readInputs(fields: FormField[], root: HTMLElement): RawInputs {
  const raw: RawInputs = {};
  for (const field of fields) {
    const input = root.querySelector<HTMLInputElement | HTMLSelectElement>(
      `[name="${CSS.escape(field.name)}"]`,
    );
    if (!input) continue;
    raw[field.name] =
      input instanceof HTMLInputElement && input.type === "checkbox"
        ? input.checked
        : input.value;
  }
  return raw;
}

async function boot(): Promise<void> {
  const api = new ApiClient(resolveBaseUrl(location.search, location.origin));
  const store = new ScenarioStore(api, "A");
  store.add("B");
  const rawInputs: Record<string, RawInputs> = { A: {}, B: {} };

  let fields: FormField[];
  try {
    fields = buildFormFields(await api.schema());
  } catch (err) {
    el("app").innerHTML = renderError(
      `cannot reach the prediction service: ${err instanceof Error ? err.message : err}`,
    );
    return;
  }

  const formRoot = el("case-form");
  const resultRoot = el("result");
  const deltaRoot = el("delta");
  const chartRoot = el("chart");

  function redraw(errors: FieldError[] = []): void {
    const active = store.active();
    formRoot.innerHTML = renderForm(fields, rawInputs[active.id], errors);
    resultRoot.innerHTML = renderResult(active.result, active.pending);
    deltaRoot.innerHTML = renderDelta(scenarioDelta(store.get("A"), store.get("B")));
    for (const button of document.querySelectorAll<HTMLButtonElement>("[data-scenario]")) {
      button.classList.toggle("active", button.dataset.scenario === active.id);
    }
  }

  el("scenario-tabs").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const id = target.dataset?.scenario;
    if (!id) return;
    rawInputs[store.activeId] = readInputs(fields, formRoot);
    store.setActive(id);
    redraw();
  });

  el("submit").addEventListener("click", async () => {
    const active = store.active();
    rawInputs[active.id] = readInputs(fields, formRoot);
    const { values, errors } = collectValues(fields, rawInputs[active.id]);
    if (errors.length) {
      redraw(errors);
      return;
    }
    store.updateValues(active.id, values);
    redraw();
    try {
      await store.submit(active.id);
      redraw();
    } catch (err) {
      if (err instanceof ApiError && err.field) {
        redraw([{ field: err.field, message: err.message }]);
      } else {
        resultRoot.innerHTML = renderError(
          err instanceof Error ? err.message : String(err),
        );
      }
    }
  });

  el("reset").addEventListener("click", () => {
    const active = store.active();
    store.reset(active.id);
    rawInputs[active.id] = {};
    redraw();
  });

  try {
    const importances = await api.importances();
    chartRoot.innerHTML = renderChart(importanceBars(importances.entries));
  } catch {
    chartRoot.innerHTML = renderError("importances unavailable");
  }

  redraw();
}

if (typeof document !== "undefined") {
  boot();
}
