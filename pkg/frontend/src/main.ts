/** DOM wiring for the planning console: populate the model dropdown,
 * keep submit disabled until the form validates, submit through the
 * single-in-flight client and render the outcome. */

import { PlanClient, NetworkError } from './api.js';
import { FormState, buildRequest, emptyForm, validateForm } from './form.js';
import { networkErrorView, planView, renderView } from './render.js';

const client = new PlanClient();

function readForm(): FormState {
  const value = (id: string) =>
    (document.getElementById(id) as HTMLInputElement | HTMLSelectElement).value;
  return {
    model: value('model'),
    budget: value('budget'),
    seqLenPreset: value('seq-preset') as FormState['seqLenPreset'],
    seqLenCustom: value('seq-custom'),
    outputLen: value('output-len'),
    batchSize: value('batch-size'),
    throughputPreset: value('throughput-preset') as FormState['throughputPreset'],
    throughputCustom: value('throughput-custom'),
    latencyPreset: value('latency-preset') as FormState['latencyPreset'],
    latencyCustom: value('latency-custom'),
    precisionTolerance: value('precision') as FormState['precisionTolerance'],
  };
}

function refreshValidation(): void {
  const form = readForm();
  const errors = validateForm(form);
  for (const field of Object.keys(emptyForm()) as (keyof FormState)[]) {
    const slot = document.querySelector(`[data-error-for="${field}"]`);
    if (slot) slot.textContent = errors[field] ?? '';
  }
  (document.getElementById('calculate') as HTMLButtonElement).disabled =
    Object.keys(errors).length > 0;
  toggleCustom('seq-preset', 'seq-custom');
  toggleCustom('throughput-preset', 'throughput-custom');
  toggleCustom('latency-preset', 'latency-custom');
}

function toggleCustom(presetId: string, customId: string): void {
  const preset = document.getElementById(presetId) as HTMLSelectElement;
  const custom = document.getElementById(customId) as HTMLInputElement;
  custom.style.display = preset.value === 'custom' ? '' : 'none';
}

function showResults(html: string): void {
  (document.getElementById('results') as HTMLElement).innerHTML = html;
  const retry = document.getElementById('retry');
  if (retry) retry.addEventListener('click', submit);
}

async function submit(): Promise<void> {
  const request = buildRequest(readForm());
  showResults('<div class="banner">Calculating…</div>');
  try {
    const response = await client.submitPlan(request);
    if (response === null) return; // superseded by a newer submission
    showResults(renderView(planView(response)));
  } catch (err) {
    if (err instanceof NetworkError) {
      showResults(renderView(networkErrorView(err.message)));
    } else {
      throw err;
    }
  }
}

async function init(): Promise<void> {
  try {
    const models = await client.listModels();
    const select = document.getElementById('model') as HTMLSelectElement;
    for (const m of models) {
      const option = document.createElement('option');
      option.value = m.name;
      option.textContent = `${m.name} (${(m.param_count / 1e9).toFixed(1)}B)`;
      select.appendChild(option);
    }
  } catch (err) {
    showResults(renderView(networkErrorView(`could not load model catalog: ${err}`)));
  }
  document.querySelectorAll('input, select').forEach((el) => {
    el.addEventListener('input', refreshValidation);
    el.addEventListener('change', refreshValidation);
  });
  (document.getElementById('calculate') as HTMLButtonElement).addEventListener('click', (e) => {
    e.preventDefault();
    void submit();
  });
  refreshValidation();
}

document.addEventListener('DOMContentLoaded', () => void init());
