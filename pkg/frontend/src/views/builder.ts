import type { Api } from '../api.js'
import { pollJob } from '../polling.js'
import {
  canSubmit,
  draftToRequest,
  emptyDraft,
  type ScenarioDraft,
  validateRequest,
} from '../scenario.js'
import { INDICATORS, type ModelSummary, type ScenarioRequest } from '../types.js'

export interface BuilderView {
  root: HTMLElement
  refreshModels: () => Promise<void>
  draft: ScenarioDraft
  onRun: (fn: (modelId: string, request: ScenarioRequest) => void) => void
  setTrainingDefaults: (datasetId: string, country: string) => void
}

export function builderView(api: Api, notifyError: (err: unknown) => void): BuilderView {
  const root = document.createElement('section')
  root.className = 'panel'
  root.innerHTML = `
    <h2>Scenario builder</h2>
    <div class="train-box">
      <h3>Train a model</h3>
      <span class="train-target">select a dataset country first</span>
      <label>seed <input type="number" class="train-seed" value="0"></label>
      <button type="button" class="train-btn" disabled>Train</button>
      <span class="job-status"></span>
    </div>
    <div class="model-box">
      <h3>Model</h3>
      <select class="model-select"><option value="">— pick a trained model —</option></select>
    </div>
    <form class="scenario-form">
      <label>name <input type="text" name="name" placeholder="my-scenario"></label>
      <label>start <input type="date" name="start" required></label>
      <label>horizon (days) <input type="number" name="horizon" value="14" min="1"></label>
      <div class="sliders"></div>
      <div class="validation"></div>
      <button type="submit" class="run-btn" disabled>Run scenario</button>
    </form>
  `
  const modelSelect = root.querySelector('.model-select') as HTMLSelectElement
  const slidersEl = root.querySelector('.sliders') as HTMLElement
  const form = root.querySelector('.scenario-form') as HTMLFormElement
  const runBtn = root.querySelector('.run-btn') as HTMLButtonElement
  const validationEl = root.querySelector('.validation') as HTMLElement
  const trainBtn = root.querySelector('.train-btn') as HTMLButtonElement
  const trainTarget = root.querySelector('.train-target') as HTMLElement
  const jobStatus = root.querySelector('.job-status') as HTMLElement

  const draft = emptyDraft()
  let trainingContext: { datasetId: string; country: string } | null = null
  const runListeners: Array<(modelId: string, request: ScenarioRequest) => void> = []

  for (const ind of INDICATORS) {
    const row = document.createElement('div')
    row.className = 'slider-row'
    row.innerHTML = `
      <label>
        <input type="checkbox" class="override-toggle" data-indicator="${ind.key}">
        ${ind.label}
      </label>
      <input type="range" min="0" max="${ind.max}" value="0" step="1"
             class="level-slider" data-indicator="${ind.key}" disabled>
      <span class="level-value">—</span>
    `
    slidersEl.appendChild(row)
  }

  function syncValidation(): void {
    const problems = validateRequest(draftToRequest(draft))
    validationEl.textContent = problems.join('; ')
    runBtn.disabled = !canSubmit(draft)
  }

  slidersEl.addEventListener('input', (ev) => {
    const target = ev.target as HTMLInputElement
    const key = target.dataset.indicator as (typeof INDICATORS)[number]['key'] | undefined
    if (!key) return
    const row = target.closest('.slider-row') as HTMLElement
    const slider = row.querySelector('.level-slider') as HTMLInputElement
    const valueEl = row.querySelector('.level-value') as HTMLElement
    if (target.classList.contains('override-toggle')) {
      slider.disabled = !target.checked
      draft.sliders[key] = target.checked ? Number(slider.value) : null
    } else {
      draft.sliders[key] = Number(slider.value)
    }
    valueEl.textContent = draft.sliders[key] === null ? '—' : String(draft.sliders[key])
    syncValidation()
  })

  form.addEventListener('input', () => {
    draft.name = (form.elements.namedItem('name') as HTMLInputElement).value
    draft.start = (form.elements.namedItem('start') as HTMLInputElement).value
    draft.horizon = Number((form.elements.namedItem('horizon') as HTMLInputElement).value)
    syncValidation()
  })

  modelSelect.addEventListener('change', () => {
    draft.modelId = modelSelect.value || null
    syncValidation()
  })

  form.addEventListener('submit', (ev) => {
    ev.preventDefault()
    if (!canSubmit(draft) || draft.modelId === null) return
    const request = draftToRequest(draft)
    for (const fn of runListeners) fn(draft.modelId, request)
  })

  trainBtn.addEventListener('click', () => {
    if (!trainingContext) return
    const seed = Number((root.querySelector('.train-seed') as HTMLInputElement).value)
    jobStatus.textContent = 'submitting…'
    void api
      .submitTraining({
        dataset_id: trainingContext.datasetId,
        country: trainingContext.country,
        variant: 'proposed',
        seed,
      })
      .then((job) => {
        jobStatus.textContent = `job ${job.job_id}: ${job.status}`
        const poller = pollJob(api, job.job_id, (j) => {
          jobStatus.textContent = `job ${j.job_id}: ${j.status}${j.status === 'failed' ? ` (${j.detail})` : ''}`
        })
        return poller.done
      })
      .then(async (job) => {
        if (job.status === 'done') await refreshModels()
      })
      .catch(notifyError)
  })

  function renderModels(models: ModelSummary[]): void {
    const prev = modelSelect.value
    modelSelect.innerHTML = '<option value="">— pick a trained model —</option>'
    for (const m of models) {
      const opt = document.createElement('option')
      opt.value = m.model_id
      opt.textContent = `${m.model_id} · ${m.target_country} · ${m.variant}`
      modelSelect.appendChild(opt)
    }
    if (models.some((m) => m.model_id === prev)) modelSelect.value = prev
    draft.modelId = modelSelect.value || null
    syncValidation()
  }

  async function refreshModels(): Promise<void> {
    try {
      renderModels(await api.listModels())
    } catch (err) {
      notifyError(err)
    }
  }

  return {
    root,
    refreshModels,
    draft,
    onRun: (fn) => runListeners.push(fn),
    setTrainingDefaults: (datasetId, country) => {
      trainingContext = { datasetId, country }
      trainTarget.textContent = `${country} @ ${datasetId}`
      trainBtn.disabled = false
    },
  }
}
