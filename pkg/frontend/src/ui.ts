/**
 * DOM wiring: admission form, daily-entry panel, trajectory chart and the
 * what-if panel. All form fields and state options come from GET /model;
 * nothing clinical is hardcoded here.
 */

import { ApiClient } from "./api.js";
import { chartData, renderChartSvg } from "./chart.js";
import { dayLabel, isAlarm, percent } from "./format.js";
import { PatientSession, fieldErrorOf } from "./state.js";
import type { ModelSummary, Observations, VariableSpec } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function selectRow(variable: VariableSpec, prefix: string): string {
  const options = ['<option value="">—</option>']
    .concat(variable.states.map((s) => `<option value="${s}">${s}</option>`))
    .join("");
  return (
    `<label class="field" data-field="${variable.name}">` +
    `<span>${variable.name}</span>` +
    `<select id="${prefix}-${variable.name}" data-name="${variable.name}">${options}</select>` +
    `<em class="field-error" hidden></em></label>`
  );
}

function readSelections(container: HTMLElement): Observations {
  const out: Observations = {};
  container.querySelectorAll<HTMLSelectElement>("select[data-name]").forEach((select) => {
    if (select.value) out[select.dataset.name as string] = select.value;
  });
  return out;
}

function showFieldError(container: HTMLElement, field: string, message: string): void {
  const row = container.querySelector<HTMLElement>(`[data-field="${field}"]`);
  if (!row) return;
  row.classList.add("invalid");
  const note = row.querySelector<HTMLElement>(".field-error");
  if (note) {
    note.textContent = message;
    note.hidden = false;
  }
}

function clearFieldErrors(container: HTMLElement): void {
  container.querySelectorAll<HTMLElement>(".invalid").forEach((n) => n.classList.remove("invalid"));
  container.querySelectorAll<HTMLElement>(".field-error").forEach((n) => {
    n.hidden = true;
    n.textContent = "";
  });
}

export async function boot(): Promise<void> {
  const client = new ApiClient("");
  const model: ModelSummary = await client.getModel();
  const session = new PatientSession(client, model);

  const admissionForm = el<HTMLElement>("admission-fields");
  admissionForm.innerHTML = model.admission_variables.map((v) => selectRow(v, "adm")).join("");
  const admitButton = el<HTMLButtonElement>("admit-button");
  const dailyForm = el<HTMLElement>("daily-fields");
  dailyForm.innerHTML = model.daily_variables.map((v) => selectRow(v, "day")).join("");
  const whatIfForm = el<HTMLElement>("whatif-fields");
  whatIfForm.innerHTML = model.daily_variables.map((v) => selectRow(v, "wif")).join("");

  const refreshAdmitButton = () => {
    admitButton.disabled = !session.admissionComplete(readSelections(admissionForm));
  };
  admissionForm.addEventListener("change", refreshAdmitButton);
  refreshAdmitButton();

  const render = () => {
    el("admission-panel").hidden = session.patientId !== null;
    el("patient-panel").hidden = session.patientId === null;
    if (session.patientId === null) return;
    el("patient-id").textContent = session.patientId;
    el("day-title").textContent = `enter ${dayLabel(session.nextDay)}`;
    const current = session.currentRisk;
    const badge = el("current-risk");
    badge.textContent = current ? percent(current.probability) : "—";
    badge.classList.toggle("alarm", current !== null && isAlarm(current.probability, model.threshold));
    el("chart").innerHTML = renderChartSvg(chartData(session.trajectory, model.threshold));
    const pending = session.pendingWhatIf;
    el("whatif-result").innerHTML = pending
      ? `<span class="tag">not committed</span> hypothetical ${dayLabel(pending.result.day)}: ` +
        `<strong class="${isAlarm(pending.result.probability, model.threshold) ? "alarm" : ""}">` +
        `${percent(pending.result.probability)}</strong>` +
        (current ? ` (current ${percent(current.probability)})` : "")
      : "";
    el<HTMLButtonElement>("commit-whatif").hidden = pending === null;
  };

  el<HTMLButtonElement>("admit-button").addEventListener("click", async () => {
    clearFieldErrors(admissionForm);
    try {
      await session.admit(readSelections(admissionForm));
      render();
    } catch (error) {
      const fieldError = fieldErrorOf(error);
      if (fieldError) showFieldError(admissionForm, fieldError.field, fieldError.message);
      else el("admission-error").textContent = String(error);
    }
  });

  el<HTMLButtonElement>("submit-day").addEventListener("click", async () => {
    clearFieldErrors(dailyForm);
    el("day-error").textContent = "";
    try {
      await session.submitDay(readSelections(dailyForm));
      dailyForm.querySelectorAll<HTMLSelectElement>("select").forEach((s) => (s.value = ""));
      render();
    } catch (error) {
      const fieldError = fieldErrorOf(error);
      if (fieldError) showFieldError(dailyForm, fieldError.field, fieldError.message);
      else el("day-error").textContent = String(error);
    }
  });

  el<HTMLButtonElement>("run-whatif").addEventListener("click", async () => {
    clearFieldErrors(whatIfForm);
    try {
      await session.whatIf(readSelections(whatIfForm));
      render();
    } catch (error) {
      const fieldError = fieldErrorOf(error);
      if (fieldError) showFieldError(whatIfForm, fieldError.field, fieldError.message);
    }
  });

  el<HTMLButtonElement>("commit-whatif").addEventListener("click", async () => {
    try {
      await session.commitWhatIf();
      whatIfForm.querySelectorAll<HTMLSelectElement>("select").forEach((s) => (s.value = ""));
      render();
    } catch (error) {
      el("day-error").textContent = String(error);
    }
  });

  render();
}
