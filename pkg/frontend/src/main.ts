import { Api, ApiError } from './api.js'
import { RequestToken } from './polling.js'
import { RunHistory, runId } from './state.js'
import { builderView } from './views/builder.js'
import { datasetView } from './views/datasets.js'
import { resultsView } from './views/results.js'

export function mountApp(root: HTMLElement, baseUrl = ''): { api: Api } {
  const api = new Api(baseUrl)
  root.innerHTML = `
    <header>
      <h1>policyscope scenario console</h1>
      <div class="banners"></div>
    </header>
    <main class="columns"></main>
  `
  const banners = root.querySelector('.banners') as HTMLElement
  const main = root.querySelector('main') as HTMLElement

  function notifyError(err: unknown): void {
    const banner = document.createElement('div')
    banner.className = 'banner'
    const text =
      err instanceof ApiError ? `${err.code}: ${err.message}` : err instanceof Error ? err.message : String(err)
    banner.textContent = text
    const close = document.createElement('button')
    close.type = 'button'
    close.textContent = '×'
    close.addEventListener('click', () => banner.remove())
    banner.appendChild(close)
    banners.appendChild(banner)
  }

  const datasets = datasetView(api, notifyError)
  const builder = builderView(api, notifyError)
  const history = new RunHistory()
  const results = resultsView(history)
  main.append(datasets.root, builder.root, results.root)

  datasets.onSelect((datasetId, country) => builder.setTrainingDefaults(datasetId, country))

  const whatifToken = new RequestToken()
  builder.onRun((modelId, request) => {
    const token = whatifToken.next()
    api
      .whatif(modelId, request)
      .then((result) => {
        if (whatifToken.isStale(token)) return // a newer run superseded this one
        results.addRun({ id: runId(), modelId, request, result, at: new Date().toISOString() })
      })
      .catch((err) => {
        if (!whatifToken.isStale(token)) notifyError(err)
      })
  })

  void datasets.refresh()
  void builder.refreshModels()
  return { api }
}

declare global {
  interface Window {
    policyscopeMount?: typeof mountApp
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  mountApp(document.getElementById('app') as HTMLElement)
}
window.policyscopeMount = mountApp
