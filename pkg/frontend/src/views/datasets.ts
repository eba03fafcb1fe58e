import type { Api } from '../api.js'
import { lineChart } from '../charts.js'
import type { DatasetSummary } from '../types.js'

export interface DatasetView {
  root: HTMLElement
  refresh: () => Promise<void>
  /** currently selected dataset + country, if any */
  selection: () => { datasetId: string; country: string } | null
  onSelect: (fn: (datasetId: string, country: string) => void) => void
}

export function datasetView(api: Api, notifyError: (err: unknown) => void): DatasetView {
  const root = document.createElement('section')
  root.className = 'panel'
  root.innerHTML = `
    <h2>Datasets</h2>
    <form class="upload-form">
      <label>cases.csv <input type="file" name="cases" accept=".csv" required></label>
      <label>policy.csv <input type="file" name="policy" accept=".csv" required></label>
      <button type="submit">Upload</button>
    </form>
    <div class="dataset-list"></div>
    <div class="country-detail"></div>
  `
  const listEl = root.querySelector('.dataset-list') as HTMLElement
  const detailEl = root.querySelector('.country-detail') as HTMLElement
  const form = root.querySelector('.upload-form') as HTMLFormElement

  let current: { datasetId: string; country: string } | null = null
  const selectListeners: Array<(d: string, c: string) => void> = []

  form.addEventListener('submit', (ev) => {
    ev.preventDefault()
    void (async () => {
      try {
        const casesFile = (form.elements.namedItem('cases') as HTMLInputElement).files?.[0]
        const policyFile = (form.elements.namedItem('policy') as HTMLInputElement).files?.[0]
        if (!casesFile || !policyFile) return
        await api.uploadDataset(await casesFile.text(), await policyFile.text())
        await refresh()
      } catch (err) {
        notifyError(err)
      }
    })()
  })

  async function showCountry(datasetId: string, country: string): Promise<void> {
    current = { datasetId, country }
    for (const fn of selectListeners) fn(datasetId, country)
    detailEl.innerHTML = `<h3>${country}</h3>`
    try {
      const cases = await api.cases(datasetId, country)
      detailEl.appendChild(
        lineChart(
          [{ label: 'new cases', values: cases.map((p) => p.new_cases), color: '#2563eb' }],
          { xLabels: cases.map((p) => p.date), title: 'Daily new cases' },
        ),
      )
    } catch (err) {
      notifyError(err)
    }
    try {
      const rt = await api.rt(datasetId, country)
      detailEl.appendChild(
        lineChart(
          [{ label: 'Rt mean', values: rt.map((p) => p.mean), color: '#059669' }],
          {
            xLabels: rt.map((p) => p.date),
            band: { low: rt.map((p) => p.ci_low), high: rt.map((p) => p.ci_high), color: '#059669' },
            title: 'Reproduction number (mean, 90% band)',
          },
        ),
      )
    } catch (err) {
      notifyError(err)
    }
  }

  function renderList(datasets: DatasetSummary[]): void {
    listEl.innerHTML = ''
    for (const ds of datasets) {
      const block = document.createElement('div')
      block.className = 'dataset-block'
      const title = document.createElement('h3')
      title.textContent = `${ds.dataset_id} (${ds.countries.length} countries)`
      block.appendChild(title)
      const ul = document.createElement('ul')
      ul.className = 'country-list'
      for (const c of ds.countries) {
        const li = document.createElement('li')
        const btn = document.createElement('button')
        btn.type = 'button'
        btn.textContent = `${c.country} · ${c.start} → ${c.end}`
        btn.addEventListener('click', () => void showCountry(ds.dataset_id, c.country))
        li.appendChild(btn)
        ul.appendChild(li)
      }
      block.appendChild(ul)
      listEl.appendChild(block)
    }
  }

  async function refresh(): Promise<void> {
    try {
      renderList(await api.listDatasets())
    } catch (err) {
      notifyError(err)
    }
  }

  return {
    root,
    refresh,
    selection: () => current,
    onSelect: (fn) => selectListeners.push(fn),
  }
}
