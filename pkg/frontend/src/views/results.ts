import { MAX_OVERLAYS, RUN_COLORS, deltaBars, lineChart, type Series } from '../charts.js'
import { RunHistory, type RunRecord } from '../state.js'

export interface ResultsView {
  root: HTMLElement
  showModel: (modelId: string) => void
  addRun: (run: RunRecord) => void
}

export function resultsView(history: RunHistory): ResultsView {
  const root = document.createElement('section')
  root.className = 'panel'
  root.innerHTML = `
    <h2>Results</h2>
    <div class="cumulative-badge" hidden></div>
    <div class="overlay-chart"></div>
    <div class="delta-chart"></div>
    <h3>Run history</h3>
    <ul class="run-list"></ul>
  `
  const overlayEl = root.querySelector('.overlay-chart') as HTMLElement
  const deltaEl = root.querySelector('.delta-chart') as HTMLElement
  const runList = root.querySelector('.run-list') as HTMLElement
  const badge = root.querySelector('.cumulative-badge') as HTMLElement

  let currentModel: string | null = null
  let selected: string[] = []

  function render(): void {
    if (!currentModel) return
    const runs = history.list(currentModel)
    runList.innerHTML = ''
    for (const run of runs) {
      const li = document.createElement('li')
      const cb = document.createElement('input')
      cb.type = 'checkbox'
      cb.checked = selected.includes(run.id)
      cb.addEventListener('change', () => {
        if (cb.checked) selected.push(run.id)
        else selected = selected.filter((id) => id !== run.id)
        render()
      })
      li.appendChild(cb)
      const span = document.createElement('span')
      span.textContent = ` ${run.request.name} · start ${run.result.start} · Σdelta ${run.result.cumulative_delta.toFixed(1)}`
      li.appendChild(span)
      runList.appendChild(li)
    }

    const chosen = runs.filter((r) => selected.includes(r.id)).slice(-MAX_OVERLAYS)
    overlayEl.innerHTML = ''
    deltaEl.innerHTML = ''
    badge.hidden = true
    if (chosen.length === 0) return

    const series: Series[] = []
    const first = chosen[0]
    series.push({ label: 'baseline', values: [...first.result.baseline], color: '#64748b', dashed: true })
    chosen.forEach((run, i) => {
      series.push({
        label: run.request.name,
        values: [...run.result.counterfactual],
        color: RUN_COLORS[i % RUN_COLORS.length],
      })
    })
    overlayEl.appendChild(
      lineChart(series, { xLabels: [...first.result.dates], title: 'Baseline vs counterfactual' }),
    )
    const last = chosen[chosen.length - 1]
    deltaEl.appendChild(
      deltaBars([...last.result.delta], { xLabels: [...last.result.dates], title: `Per-day delta (${last.request.name})` }),
    )
    badge.hidden = false
    badge.textContent = `cumulative delta (${last.request.name}): ${last.result.cumulative_delta.toFixed(2)}`
    badge.className = `cumulative-badge ${last.result.cumulative_delta >= 0 ? 'badge-up' : 'badge-down'}`
  }

  return {
    root,
    showModel: (modelId) => {
      currentModel = modelId
      selected = history.list(modelId).map((r) => r.id)
      render()
    },
    addRun: (run) => {
      history.add(run)
      currentModel = run.modelId
      selected.push(run.id)
      render()
    },
  }
}
