#!/usr/bin/env python3
"""Regenerate corpus/syntax and corpus/schema from the case tables below.

Every case is checked against the reference engine (jinja2) before it is
written: expected fixed texts must parse clean, and each hand-written root
set must equal jinja's undeclared-variable analysis. Filter, tag, macro and
block expectations are read off jinja's own AST, not from temlint.

    python3 scripts/build_corpus.py [--out corpus]
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

import jinja2
from jinja2 import Environment, meta, nodes

ENV = Environment()

# (id, category, pattern, input, expected codes, expected fixed text)
SYNTAX = [
    # nested delimiters
    ("n01", "nested-delimiter", "output delimiter inside if condition",
     "{% if {{user}} %}Welcome back{% endif %}", ["TL001"], "{% if user %}Welcome back{% endif %}"),
    ("n02", "nested-delimiter", "output delimiter inside output delimiter",
     "<p>{{ {{ name }} }}</p>", ["TL001"], "<p>{{ name }}</p>"),
    ("n03", "nested-delimiter", "output delimiter as for iterable",
     "{% for item in {{ items }} %}<li>{{ item }}</li>{% endfor %}", ["TL001"],
     "{% for item in items %}<li>{{ item }}</li>{% endfor %}"),
    ("n04", "nested-delimiter", "output delimiter as keyword argument",
     "<link href=\"{{ url_for('static', filename={{ css_path }}) }}\">", ["TL001"],
     "<link href=\"{{ url_for('static', filename=css_path) }}\">"),
    ("n05", "nested-delimiter", "output delimiter in set expression",
     "{% set total = {{ price }} * qty %}{{ total }}", ["TL001"], "{% set total = price * qty %}{{ total }}"),
    ("n06", "nested-delimiter", "boolean expression wrapped in output delimiter",
     "{% if {{ is_admin and is_active }} %}<a href=\"/admin\">Admin</a>{% endif %}", ["TL001"],
     "{% if is_admin and is_active %}<a href=\"/admin\">Admin</a>{% endif %}"),
    ("n07", "nested-delimiter", "nested output inside arithmetic",
     "Total: {{ {{ price }} * 2 }}", ["TL001"], "Total: {{ price * 2 }}"),
    ("n08", "nested-delimiter", "mustache inside quoted subscript key",
     "{{ translations['{{ key }}'] }}", ["TL001"], "{{ translations[key] }}"),
    ("n09", "nested-delimiter", "output delimiter as include target",
     "{% include {{ partial_name }} %}", ["TL001"], "{% include partial_name %}"),
    ("n10", "nested-delimiter", "output delimiter inside concatenation",
     "<h1>{{ greeting ~ {{ name }} }}</h1>", ["TL001"], "<h1>{{ greeting ~ name }}</h1>"),
    ("n11", "nested-delimiter", "nested output in attribute value",
     "<a href=\"/users/{{ {{ user.id }} }}\">{{ user.name }}</a>\n", ["TL001"],
     "<a href=\"/users/{{ user.id }}\">{{ user.name }}</a>\n"),
    # misplaced extends
    ("e01", "misplaced-extends", "extends after an output tag",
     "{{item}}{% extends \"base.html\" %}", ["TL002"], "{% extends \"base.html\" %}{{item}}"),
    ("e02", "misplaced-extends", "extends after a doctype line",
     "<!DOCTYPE html>\n{% extends \"layout.html\" %}\n{% block content %}Hi{% endblock %}\n", ["TL002"],
     "{% extends \"layout.html\" %}\n<!DOCTYPE html>\n{% block content %}Hi{% endblock %}\n"),
    ("e03", "misplaced-extends", "extends inside an if block",
     "{% if mobile %}{% extends \"mobile.html\" %}{% endif %}{% block body %}x{% endblock %}", ["TL002"],
     "{% extends \"mobile.html\" %}{% if mobile %}{% endif %}{% block body %}x{% endblock %}"),
    ("e04", "misplaced-extends", "extends at end of file",
     "{% block title %}Orders{% endblock %}\n{% extends \"base.html\" %}\n", ["TL002"],
     "{% extends \"base.html\" %}\n{% block title %}Orders{% endblock %}\n"),
    # mismatched delimiters
    ("m01", "mismatched-delimiter", "statement closer removed",
     "{% if user\nHi {{ user }}{% endif %}", ["TL003"], "{% if user %}\nHi {{ user }}{% endif %}"),
    ("m02", "mismatched-delimiter", "half of output closer removed",
     "<p>{{ name }</p>\n", ["TL003"], "<p>{{ name }}</p>\n"),
    ("m03", "mismatched-delimiter", "output closer missing at end of file",
     "Hello {{ name", ["TL003"], "Hello {{ name }}"),
    ("m04", "mismatched-delimiter", "statement closed with output closer",
     "{% if user }}Hi{% endif %}", ["TL003"], "{% if user %}Hi{% endif %}"),
    ("m05", "mismatched-delimiter", "output closed with statement closer",
     "<span>{{ count %}</span>", ["TL003"], "<span>{{ count }}</span>"),
    ("m06", "mismatched-delimiter", "for block without endfor",
     "<ul>{% for x in items %}<li>{{ x }}</li>", ["TL003"], "<ul>{% for x in items %}<li>{{ x }}</li>{% endfor %}"),
    ("m07", "mismatched-delimiter", "if block left open inside for",
     "{% for u in users %}{% if u.active %}{{ u.name }}{% endfor %}", ["TL003"],
     "{% for u in users %}{% if u.active %}{{ u.name }}{% endif %}{% endfor %}"),
    ("m08", "mismatched-delimiter", "stray endif",
     "{% if a %}x{% endif %}{% endif %}", ["TL003"], "{% if a %}x{% endif %}"),
    ("m09", "mismatched-delimiter", "comment closer missing",
     "{# TODO: fix layout\n<p>{{ body }}</p>", ["TL003"], "{# TODO: fix layout #}\n<p>{{ body }}</p>"),
    ("m10", "mismatched-delimiter", "macro without endmacro",
     "{% macro field(name) %}<input name=\"{{ name }}\">\n", ["TL003"],
     "{% macro field(name) %}<input name=\"{{ name }}\">\n{% endmacro %}"),
    # invalid property access
    ("a01", "invalid-access", "arrow accessor",
     "{{ user->name }}", ["TL004"], "{{ user.name }}"),
    ("a02", "invalid-access", "arrow after dynamic subscript",
     "{{ user[name]->email }}", ["TL004"], "{{ user[name].email }}"),
    ("a03", "invalid-access", "arrow in if condition",
     "{% if order->status == \"paid\" %}Paid{% endif %}", ["TL004"], "{% if order.status == \"paid\" %}Paid{% endif %}"),
    ("a04", "invalid-access", "chained arrows",
     "host: {{ config->db->host }}", ["TL004"], "host: {{ config.db.host }}"),
    ("a05", "invalid-access", "arrows in loop header and body",
     "{% for item in cart->items %}{{ item->price }}{% endfor %}", ["TL004", "TL004"],
     "{% for item in cart.items %}{{ item.price }}{% endfor %}"),
]

# Root shapes: "scalar"/"unknown" leaves; dicts are objects; a "[]" key marks
# an iterable whose element shape is the value.
S = "scalar"

SCHEMA = [
    # ---- HTML ---------------------------------------------------------------
    ("h01", "html-template", """<h1>Hello {{ username }}</h1>
<ul>
{% for todo in todos %}
  <li>{{ todo.title }}{% if todo.finished == 100 %} (done){% endif %}</li>
{% endfor %}
</ul>
""", {"username": S, "todos": {"[]": {"title": S, "finished": S}}}),
    ("h02", "html-template", """{% for category in catalog.categories %}
<section id="{{ category.slug }}">
  <h2>{{ category.name|title }}</h2>
  {% for product in category.products|sort(attribute='price') %}
    <div class="p">{{ product.name }} - {{ product.price|round(2) }}
      {% for tag in product.tags %}<span>{{ tag }}</span>{% endfor %}
    </div>
  {% else %}<p>{{ empty_message }}</p>
  {% endfor %}
</section>
{% endfor %}
""", {"catalog": {"categories": {"[]": {"slug": S, "name": S, "products": {"[]": {"name": S, "price": S, "tags": {"[]": S}}}}}},
      "empty_message": S}),
    ("h03", "html-template", """{% macro render_field(field, label) %}
<label>{{ label }}</label><input name="{{ field.name }}" value="{{ field.value|default('') }}">
{% if field.errors %}<ul>{% for e in field.errors %}<li>{{ e }}</li>{% endfor %}</ul>{% endif %}
{% endmacro %}
<form action="{{ action_url }}" method="post">
{{ render_field(form.email, 'Email') }}
{{ render_field(form.password, 'Password') }}
<input type="hidden" name="csrf" value="{{ csrf_token }}">
</form>
""", {"action_url": S, "form": {"email": S, "password": S}, "csrf_token": S}),
    ("h04", "html-template", """{% set visible = posts|selectattr('published')|list %}
<p>{{ visible|length }} of {{ posts|length }} posts</p>
{% for post in visible %}<article><h2>{{ post.title|e }}</h2>{{ post.body|striptags|truncate(200) }}</article>{% endfor %}
""", {"posts": S}),
    ("h05", "html-template", """{% extends "base.html" %}
{% block title %}{{ page.title }} | {{ site_name }}{% endblock %}
{% block content %}
  {{ super() }}
  {% for section in page.sections %}<div>{{ section.heading }}{{ section.html|safe }}</div>{% endfor %}
{% endblock %}
""", {"page": {"title": S, "sections": {"[]": {"heading": S, "html": S}}}, "site_name": S}),
    ("h06", "html-template", """<table>
{% for row in rows %}
<tr class="{{ loop.cycle('odd', 'even') }}">
  <td>{{ loop.index }}</td>
  {% for cell in row.cells %}<td>{{ cell.value }}</td>{% endfor %}
</tr>
{% endfor %}
</table>
<p>Total: {{ rows|length }}</p>
""", {"rows": {"[]": {"cells": {"[]": {"value": S}}}}}),
    ("h07", "html-template", """{% if user.is_authenticated %}
  <span>{{ user.profile.display_name }}</span>
  {% if user.profile.avatar %}<img src="{{ user.profile.avatar.url }}">{% endif %}
{% elif guest_name %}
  <span>{{ guest_name }}</span>
{% else %}
  <a href="{{ login_url }}">Log in</a>
{% endif %}
""", {"user": {"is_authenticated": S, "profile": {"display_name": S, "avatar": {"url": S}}}, "guest_name": S, "login_url": S}),
    ("h08", "html-template", """<h1>{{ labels['title'] }}</h1>
{% for key in ordering %}<p>{{ labels[key] }}: {{ values[key]|default('-') }}</p>{% endfor %}
<footer>{{ labels["footer text"] }}</footer>
""", {"labels": {"title": S, "*": S, "footer text": S}, "ordering": {"[]": S}, "values": {"*": S}}),
    ("h09", "html-template", """<h1>{{ title.upper() }}</h1>
<ul>{% for name in members %}<li>{{ name.strip()|capitalize }}</li>{% endfor %}</ul>
""", {"title": S, "members": {"[]": S}}, True),
    ("h10", "html-template", """{% include "header.html" %}
<dl>
{% for key, value in settings|dictsort %}<dt>{{ key }}</dt><dd>{{ value }}</dd>{% endfor %}
</dl>
{% include footer_template %}
""", {"settings": S, "footer_template": S}),
    ("h11", "html-template", """<nav>
{% if pagination.has_prev %}<a href="?page={{ pagination.page - 1 }}">Prev</a>{% endif %}
{% for p in range(1, pagination.pages + 1) %}
  {% if p == pagination.page %}<b>{{ p }}</b>{% else %}<a href="?page={{ p }}">{{ p }}</a>{% endif %}
{% endfor %}
{% if pagination.has_next %}<a href="?page={{ pagination.page + 1 }}">Next</a>{% endif %}
</nav>
""", {"pagination": {"has_prev": S, "page": S, "pages": S, "has_next": S}}),
    ("h12", "html-template", """{% set greeting %}Hello, {{ customer.first_name }} {{ customer.last_name }}!{% endset %}
<p>{{ greeting }}</p>
{% for line in order.lines %}<tr><td>{{ line.sku }}</td><td>{{ line.qty }} x {{ line.unit_price|round(2) }}</td></tr>{% endfor %}
<p>{{ order.total|round(2) }} {{ currency }}</p>
""", {"customer": {"first_name": S, "last_name": S}, "order": {"lines": {"[]": {"sku": S, "qty": S, "unit_price": S}}, "total": S},
      "currency": S}),
    ("h13", "html-template", """<ul>
{% for item in inventory if item.stock > 0 %}
<li>{{ item.name }} ({{ item.stock }})</li>
{% else %}
<li>{{ out_of_stock_text }}</li>
{% endfor %}
</ul>
""", {"inventory": {"[]": {"stock": S, "name": S}}, "out_of_stock_text": S}),
    ("h14", "html-template", """{% macro badge(level) %}<span class="badge {{ palette[level] }}">{{ level|upper }}</span>{% endmacro %}
{% set palette = theme.colors %}
{% for alert in alerts %}{{ badge(alert.level) }} {{ alert.message }}{% endfor %}
""", {"theme": {"colors": {"*": S}}, "alerts": {"[]": {"level": S, "message": S}}}),
    ("h15", "html-template", """<h2>{{ report.meta.title }}</h2>
<p>First: {{ report.entries[0].label }}</p>
{% for entry in report.entries %}
  <div>{{ entry.label }}: {% for v in entry['values'] %}{{ v|float|round(1) }} {% endfor %}</div>
{% endfor %}
""", {"report": {"meta": {"title": S}, "entries": {"[]": {"label": S, "values": {"[]": S}}, "*": {"label": S}}}}),
    ("h16", "html-template", """{#- primary navigation -#}
<ul>
{%- for link in nav_links %}
  <li{% if link.active %} class="active"{% endif %}><a href="{{- link.href -}}">{{ link.text }}</a></li>
{%- endfor %}
</ul>
""", {"nav_links": {"[]": {"active": S, "href": S, "text": S}}}),
    ("h17", "html-template", """{% if articles is defined and articles|length > 0 %}
{% for a in articles|sort(attribute='date', reverse=true) %}
<h3>{{ a.title|title }}</h3><time>{{ a.date }}</time>{% if a.tags is iterable %}{{ a.tags|join(', ') }}{% endif %}
{% endfor %}
{% endif %}
""", {"articles": {"[]": {"title": S, "date": S, "tags": S}}}),
    ("h18", "html-template", """<p class="date">{{ created_at|datetimeformat('%Y-%m-%d') }}</p>
<div class="body">{{ body|markdown|safe }}</div>
<p>Contact: {{ author.email|obfuscate }}</p>
""", {"created_at": S, "body": S, "author": {"email": S}}),
    ("h19", "html-template", """{% extends "layout.html" %}
{% set active_page = "gallery" %}
{% block content %}
{% for photo in album.photos %}
<figure><img src="{{ photo.src }}" alt="{{ photo.caption|e }}"><figcaption>{{ photo.caption }}</figcaption></figure>
{% endfor %}
<p>{{ album.owner.name }}</p>
{% endblock %}
""", {"album": {"photos": {"[]": {"src": S, "caption": S}}, "owner": {"name": S}}}),
    ("h20", "html-template", """<ul>
{% for user in users %}
<li>{{ user.name.title() }} ({{ user.email }})</li>
{% endfor %}
</ul>
{% for key in preferences.keys() %}<code>{{ key }}</code>{% endfor %}
""", {"users": {"[]": {"name": S, "email": S}}, "preferences": S}, True),
    # ---- YAML ---------------------------------------------------------------
    ("y01", "yaml-template", """server:
  listen: {{ nginx_port | default(80) }}
  server_name: {{ inventory_hostname }}
  vhosts:
{% for vhost in nginx_vhosts %}
    - name: {{ vhost.name }}
      root: {{ vhost.root }}
{% endfor %}
""", {"nginx_port": S, "inventory_hostname": S, "nginx_vhosts": {"[]": {"name": S, "root": S}}}),
    ("y02", "yaml-template", """users:
{% for user in users %}
  - name: {{ user.name }}
    groups: [{{ user.groups | join(', ') }}]
    shell: {{ user.shell | default('/bin/bash') }}
{% if user.ssh_keys is defined %}
    keys:
{% for key in user.ssh_keys %}
      - {{ key }}
{% endfor %}
{% endif %}
{% endfor %}
""", {"users": {"[]": {"name": S, "groups": S, "shell": S, "ssh_keys": {"[]": S}}}}),
    ("y03", "yaml-template", """environment:
{% for name, value in app_env | dictsort %}
  {{ name }}: "{{ value }}"
{% endfor %}
  DATABASE_URL: "postgres://{{ db.user }}:{{ db.password }}@{{ db.host }}:{{ db.port }}/{{ db.name }}"
""", {"app_env": S, "db": {"user": S, "password": S, "host": S, "port": S, "name": S}}),
    ("y04", "yaml-template", """apiVersion: apps/v1
kind: Deployment
metadata:
  name: {{ app.name }}
  namespace: {{ k8s_namespace | default('default') }}
spec:
  replicas: {{ app.replicas }}
  template:
    spec:
      containers:
{% for c in app.containers %}
        - name: {{ c.name }}
          image: "{{ c.image.repository }}:{{ c.image.tag }}"
          ports:
{% for p in c.ports %}
            - containerPort: {{ p }}
{% endfor %}
{% endfor %}
""", {"app": {"name": S, "replicas": S, "containers": {"[]": {"name": S, "image": {"repository": S, "tag": S}, "ports": {"[]": S}}}},
      "k8s_namespace": S}),
    ("y05", "yaml-template", """[webservers]
{% for host in groups['web'] %}
{{ host }} ansible_host={{ hostvars[host]['ansible_host'] }}
{% endfor %}

[dbservers]
{% for host in groups['db'] %}
{{ host }}
{% endfor %}
""", {"groups": {"web": {"[]": S}, "db": {"[]": S}}, "hostvars": {"*": {"ansible_host": S}}}),
    ("y06", "yaml-template", """password_hash: {{ admin_password | password_hash('sha512') }}
config: |
  {{ app_config | to_nice_yaml(indent=2) | indent(2) }}
enabled: {{ feature_flag | bool }}
""", {"admin_password": S, "app_config": S, "feature_flag": S}),
    ("y07", "yaml-template", """{% macro port_entry(port, proto='tcp') %}
  - port: {{ port }}
    protocol: {{ proto | upper }}
{% endmacro %}
firewall:
{% for port in open_ports %}
{{ port_entry(port) }}
{% endfor %}
{% for port in udp_ports %}
{{ port_entry(port, 'udp') }}
{% endfor %}
""", {"open_ports": {"[]": S}, "udp_ports": {"[]": S}}),
    ("y08", "yaml-template", """logging:
  level: {% if debug %}DEBUG{% elif verbose %}INFO{% else %}{{ log_level | default('WARNING') }}{% endif %}
  handlers:
{% for h in log_handlers if h.enabled %}
    - type: {{ h.type }}
{% if h.type == 'file' %}
      path: {{ h.path | default(log_dir ~ '/app.log') }}
{% endif %}
{% endfor %}
""", {"debug": S, "verbose": S, "log_level": S, "log_dir": S, "log_handlers": {"[]": {"enabled": S, "type": S, "path": S}}}),
    ("y09", "yaml-template", """{% set base_dir = deploy.root ~ '/' ~ deploy.app %}
paths:
  releases: {{ base_dir }}/releases
  shared: {{ base_dir }}/shared
  linked:
{% for d in deploy.shared_dirs %}
    - {{ base_dir }}/shared/{{ d }}
{% endfor %}
keep_releases: {{ deploy.keep | default(5) }}
""", {"deploy": {"root": S, "app": S, "shared_dirs": {"[]": S}, "keep": S}}),
    ("y10", "yaml-template", """services:
{% for svc in compose.services %}
  {{ svc.name }}:
    image: {{ svc.image }}
{% if svc.env %}
    environment:
{% for e in svc.env %}
      - {{ e.key }}={{ e.value }}
{% endfor %}
{% endif %}
{% if svc.depends_on %}
    depends_on: {{ svc.depends_on | tojson }}
{% endif %}
{% endfor %}
volumes:
{% for vol in compose.volumes %}
  {{ vol }}: {}
{% endfor %}
""", {"compose": {"services": {"[]": {"name": S, "image": S, "env": {"[]": {"key": S, "value": S}}, "depends_on": S}},
                  "volumes": {"[]": S}}}),
    ("y11", "yaml-template", """hosts: [{% for h in cluster.nodes %}"{{ h.address }}:{{ h.port | default(cluster.default_port) }}"{% if not loop.last %}, {% endif %}{% endfor %}]
leader: {{ cluster.nodes[0].address }}
""", {"cluster": {"nodes": {"[]": {"address": S, "port": S}, "*": {"address": S}}, "default_port": S}}),
    ("y12", "yaml-template", """{% for pkg in packages %}
- name: install {{ pkg.name }}
  apt:
    name: "{{ pkg.name }}{% if pkg.version is defined %}={{ pkg.version }}{% endif %}"
    state: {{ pkg.state | default('present') }}
{% endfor %}
update_cache: {{ apt_update_cache | default(true) | bool }}
""", {"packages": {"[]": {"name": S, "version": S, "state": S}}, "apt_update_cache": S}),
    ("y13", "yaml-template", """{% set header %}
# Managed by {{ managed_by }}
# Host: {{ ansible_facts['hostname'] }}
{% endset %}
{{ header }}
ntp_servers:
{% for s in ntp.servers %}
  - {{ s }}
{% endfor %}
timezone: {{ ntp.timezone }}
""", {"managed_by": S, "ansible_facts": {"hostname": S}, "ntp": {"servers": {"[]": S}, "timezone": S}}),
    ("y14", "yaml-template", """resources:
  limits:
    cpu: {{ (resources.cpu * 1000) | int }}m
    memory: {{ resources.memory_mb }}Mi
{% if resources.memory_mb > 1024 %}
  jvm_opts: "-Xmx{{ (resources.memory_mb * 0.75) | int }}m"
{% endif %}
replicas: {{ [min_replicas, 1] | max }}
""", {"resources": {"cpu": S, "memory_mb": S}, "min_replicas": S}),
    ("y15", "yaml-template", """{% include 'common/header.yml' %}
tasks:
{% for task in playbook.tasks %}
  - name: {{ task.name }}
    {{ task.module }}: {{ task.args | to_json }}
{% if task.tags %}
    tags: {{ task.tags | join(',') }}
{% endif %}
{% endfor %}
""", {"playbook": {"tasks": {"[]": {"name": S, "module": S, "args": S, "tags": S}}}}),
    ("y16", "yaml-template", """{% macro kv(key, value) %}{{ key }} = {{ value }}{% endmacro %}
{% macro section(title, items) %}
[{{ title }}]
{% for k, v in items %}
{{ kv(k, v) }}
{% endfor %}
{% endmacro %}
{{ section('database', db_settings) }}
{{ section('cache', cache_settings) }}
""", {"db_settings": S, "cache_settings": S}),
    ("y17", "yaml-template", """workers:
{% for i in range(worker_count) %}
  worker_{{ i }}:
    port: {{ base_port + i }}
    queue: {{ queues[i % queues|length] }}
{% endfor %}
""", {"worker_count": S, "base_port": S, "queues": {"*": S}}),
    ("y18", "yaml-template", """{% for host in groups['all'] %}
{{ hostvars[host]['inventory_hostname'] }}:
  ip: {{ hostvars[host]['ansible_default_ipv4']['address'] }}
  role: {{ hostvars[host].role | default('none') }}
{% endfor %}
""", {"groups": {"all": {"[]": S}}, "hostvars": {"*": {"inventory_hostname": S, "ansible_default_ipv4": {"address": S}, "role": S}}}),
    ("y19", "yaml-template", """{% for team in org.teams %}
{{ team.name }}:
  lead: {{ team.lead.name }} <{{ team.lead.email }}>
  members:
{% for m in team.members | sort(attribute='name') %}
    - {{ m.name }}{% if m.name == team.lead.name %} (lead){% endif %}
{% endfor %}
{% endfor %}
org_name: {{ org.name }}
""", {"org": {"teams": {"[]": {"name": S, "lead": {"name": S, "email": S}, "members": {"[]": {"name": S}}}}, "name": S}}),
    ("y20", "yaml-template", """admins: {{ users | selectattr('admin') | map(attribute='login') | list | to_nice_yaml }}
regions: {{ servers | map(attribute='region') | unique | sort | join(', ') }}
count: {{ servers | rejectattr('retired') | list | length }}
""", {"users": S, "servers": S}),
    # ---- SQL ----------------------------------------------------------------
    ("s01", "sql-template", """select
  id,
  {{ column_name }} as value
from {{ ref('orders') }}
where created_at >= '{{ start_date }}'
""", {"column_name": S, "ref": S, "start_date": S}),
    ("s02", "sql-template", """select
{% for col in columns %}
  {{ col.name }}{% if col.alias %} as {{ col.alias }}{% endif %}{% if not loop.last %},{% endif %}
{% endfor %}
from {{ source(schema_name, table_name) }}
""", {"columns": {"[]": {"name": S, "alias": S}}, "source": S, "schema_name": S, "table_name": S}),
    ("s03", "sql-template", """{{ config(materialized='incremental', unique_key='id') }}
select * from {{ ref('events') }}
{% if is_incremental() %}
where event_time > (select max(event_time) from {{ this }})
{% endif %}
""", {"config": S, "ref": S, "is_incremental": S, "this": S}),
    ("s04", "sql-template", """{% set payment_methods = ['card', 'cash', 'voucher'] %}
select
  order_id,
{% for method in payment_methods %}
  sum(case when payment_method = '{{ method }}' then amount else 0 end) as {{ method }}_amount{% if not loop.last %},{% endif %}
{% endfor %}
from {{ ref('payments') }}
group by 1
""", {"ref": S}),
    ("s05", "sql-template", """{% macro cents_to_dollars(column, precision=2) %}
round({{ column }} / 100.0, {{ precision }})
{% endmacro %}
select
  id,
  {{ cents_to_dollars('amount') }} as amount_usd,
  {{ cents_to_dollars('fee', fee_precision) }} as fee_usd
from {{ ref('stg_payments') }}
where status in ({% for s in statuses %}'{{ s }}'{% if not loop.last %}, {% endif %}{% endfor %})
""", {"fee_precision": S, "ref": S, "statuses": {"[]": S}}),
    ("s06", "sql-template", """select *
from {{ target.schema }}.{{ model_config.table }}
where region = '{{ model_config.filters.region }}'
{% if model_config.filters.since %}
  and updated_at > '{{ model_config.filters.since }}'
{% endif %}
limit {{ model_config.limit | default(100) }}
""", {"target": {"schema": S}, "model_config": {"table": S, "filters": {"region": S, "since": S}, "limit": S}}),
    ("s07", "sql-template", """{% set sources = source_tables %}
{% for src in sources %}
select '{{ src.name }}' as source, * from {{ src.schema }}.{{ src.name }}
{% if not loop.last %}union all{% endif %}
{% endfor %}
""", {"source_tables": {"[]": {"name": S, "schema": S}}}),
    ("s08", "sql-template", """select d.date_day{% for m in metrics %}, coalesce({{ m.agg }}({{ m.column }}), 0) as {{ m.name }}{% endfor %}
from {{ ref('date_spine') }} d
{% for j in joins %}
left join {{ ref(j.model) }} {{ j.alias }} on {{ j.alias }}.{{ j.key }} = d.date_day
{% endfor %}
group by 1
""", {"metrics": {"[]": {"agg": S, "column": S, "name": S}}, "ref": S, "joins": {"[]": {"model": S, "alias": S, "key": S}}}),
    ("s09", "sql-template", """create table {{ table_name }} (
{% for name, spec in column_specs | dictsort %}
  {{ name }} {{ spec['type'] | upper }}{% if spec['nullable'] is sameas false %} not null{% endif %},
{% endfor %}
  loaded_at timestamp default {{ current_timestamp_sql }}
)
""", {"table_name": S, "column_specs": S, "current_timestamp_sql": S}),
    ("s10", "sql-template", """select *
from {{ ref(model_name) }}
where 1 = 1
{% for f in filters %}
{% if f.op == 'in' %}
  and {{ f.column }} in ({{ f.values | join(', ') }})
{% elif f.op == 'between' %}
  and {{ f.column }} between {{ f['values'][0] }} and {{ f['values'][1] }}
{% else %}
  and {{ f.column }} {{ f.op }} {{ f.value }}
{% endif %}
{% endfor %}
order by {{ order_by | default('1') }}
""", {"ref": S, "model_name": S, "filters": {"[]": {"op": S, "column": S, "values": {"*": S}, "value": S}}, "order_by": S}),
]

_TAG_NODES = {
    nodes.For: "for", nodes.If: "if", nodes.Macro: "macro", nodes.Assign: "set", nodes.AssignBlock: "set",
    nodes.Block: "block", nodes.Extends: "extends", nodes.Include: "include", nodes.CallBlock: "call",
    nodes.FilterBlock: "filter", nodes.With: "with", nodes.Import: "import", nodes.FromImport: "from",
}


def shape(spec) -> dict:
    if isinstance(spec, str):
        return {"kind": spec, "children": {}}
    spec = dict(spec)
    element = spec.pop("[]", None)
    doc = {"kind": "object", "children": {k: shape(v) for k, v in sorted(spec.items())}}
    if element is not None:
        doc["kind"] = "iterable"
        doc["element"] = shape(element)
    return doc


def jinja_catalogue(source: str) -> dict:
    """Filters, tags, macros and blocks as the reference engine sees them."""
    tree = ENV.parse(source)
    filters = {f.name: "builtin" if f.name in ENV.filters else "custom" for f in tree.find_all(nodes.Filter)}
    tags: dict[str, str] = {}
    for cls, name in _TAG_NODES.items():
        if any(True for _ in tree.find_all(cls)):
            tags[name] = "builtin"
    return {
        "filters": dict(sorted(filters.items())),
        "tags": dict(sorted(tags.items())),
        "macros": sorted(m.name for m in tree.find_all(nodes.Macro)),
        "blocks": sorted(b.name for b in tree.find_all(nodes.Block)),
    }


def oracle_env(source: str) -> Environment:
    """Environment with stand-ins for the template's custom filters, which
    jinja's variable analysis otherwise refuses to compile."""
    env = Environment()
    for f in ENV.parse(source).find_all(nodes.Filter):
        env.filters.setdefault(f.name, lambda value, *a, **kw: value)
    return env


def accepts(text: str) -> bool:
    try:
        ENV.parse(text)
    except jinja2.TemplateSyntaxError:
        return False
    return True


def provenance() -> dict:
    return {"oracle": f"jinja2 {jinja2.__version__}", "validated": True}


def write_case(directory: Path, files: dict[str, str]) -> None:
    directory.mkdir(parents=True)
    for name, text in files.items():
        (directory / name).write_text(text, "utf-8")


def build(out: Path) -> list[str]:
    problems = []
    for sub in ("syntax", "schema"):
        shutil.rmtree(out / sub, ignore_errors=True)
    for cid, category, pattern, text, codes, fixed in SYNTAX:
        if not accepts(fixed):
            problems.append(f"{cid}: expected fix rejected by the oracle")
        meta_doc = {"category": category, "pattern": pattern, "provenance": {**provenance(), "input_accepted": accepts(text)}}
        write_case(out / "syntax" / cid, {
            "input.tpl": text,
            "expected.codes": "\n".join(codes) + "\n",
            "expected.fixed.tpl": fixed,
            "meta": json.dumps(meta_doc, indent=2, sort_keys=True) + "\n",
        })
    for cid, category, text, roots, *rest in SCHEMA:
        method_pattern = bool(rest and rest[0])
        if not accepts(text):
            problems.append(f"{cid}: template rejected by the oracle")
            continue
        undeclared = sorted(meta.find_undeclared_variables(oracle_env(text).parse(text)))
        if undeclared != sorted(roots):
            problems.append(f"{cid}: roots {sorted(roots)} != oracle {undeclared}")
        expected = {"roots": {k: shape(v) for k, v in sorted(roots.items())}, **jinja_catalogue(text)}
        meta_doc = {"category": category, "method_pattern": method_pattern, "provenance": provenance()}
        write_case(out / "schema" / cid, {
            "input.tpl": text,
            "expected.schema": json.dumps(expected, indent=2, sort_keys=True) + "\n",
            "meta": json.dumps(meta_doc, indent=2, sort_keys=True) + "\n",
        })
    return problems


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "corpus"))
    ns = parser.parse_args()
    problems = build(Path(ns.out))
    for p in problems:
        print("problem:", p, file=sys.stderr)
    print(f"wrote {len(SYNTAX)} syntax cases and {len(SCHEMA)} schema cases to {ns.out}")
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
